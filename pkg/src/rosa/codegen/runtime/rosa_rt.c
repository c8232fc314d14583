#include "rosa_rt.h"

#include <string.h>
#include <time.h>

#define GAMMA 0x9E3779B97F4A7C15ULL
#define MIX1 0xBF58476D1CE4E5B9ULL
#define MIX2 0x94D049BB133111EBULL
#define TWO_PI 6.283185307179586
#define WIDTH 80

static uint64_t state = 1;
static int n_args = 0;
static char **args = NULL;

void rt_fail(const char *msg) {
    fflush(stdout);
    fprintf(stderr, "Error: %s\n", msg);
    exit(5);
}

void rt_init(int argc, char **argv) {
    if (argc > 1) state = (uint64_t)strtoll(argv[1], NULL, 10);
    n_args = argc > 2 ? argc - 2 : 0;
    args = argv + 2;
}

static const char *find_arg(const char *name) {
    size_t k = strlen(name);
    for (int i = 0; i < n_args; i++)
        if (strncmp(args[i], name, k) == 0 && args[i][k] == '=') return args[i] + k + 1;
    return NULL;
}

double rt_arg_d(const char *name, double dflt) {
    const char *v = find_arg(name);
    return v ? strtod(v, NULL) : dflt;
}

int rt_arg_i(const char *name, int dflt) {
    const char *v = find_arg(name);
    return v ? (int)strtod(v, NULL) : dflt;
}

/* -- generator ------------------------------------------------------------ */

uint64_t rt_next(void) {
    uint64_t z = (state += GAMMA);
    z = (z ^ (z >> 30)) * MIX1;
    z = (z ^ (z >> 27)) * MIX2;
    return z ^ (z >> 31);
}

double rt_unif(void) { return (double)(rt_next() >> 11) * 0x1.0p-53; }

uint64_t rt_unif_int(uint64_t k) {
    uint64_t r = (0 - k) % k; /* 2^64 mod k */
    for (;;) {
        uint64_t z = rt_next();
        if (r == 0 || z < 0 - r) return z % k;
    }
}

double rt_norm(void) {
    double u1 = 1.0 - rt_unif();
    double u2 = rt_unif();
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2);
}

double rt_beta(double a, double b) {
    for (;;) {
        double lx = log(1.0 - rt_unif()) / a;
        double ly = log(1.0 - rt_unif()) / b;
        double m = lx > ly ? lx : ly;
        double ls = m + log(exp(lx - m) + exp(ly - m));
        if (ls <= 0.0) return exp(lx - ls);
    }
}

/* -- allocation ----------------------------------------------------------- */

static void *xcalloc(long n, size_t sz) {
    void *p = calloc(n > 0 ? (size_t)n : 1, sz);
    if (!p) rt_fail("cannot allocate vector");
    return p;
}

RVecD *rt_vec_d(long n) {
    RVecD *v = xcalloc(1, sizeof *v);
    v->len = n;
    v->d = xcalloc(n, sizeof(double));
    return v;
}

RVecI *rt_vec_i(long n) {
    RVecI *v = xcalloc(1, sizeof *v);
    v->len = n;
    v->d = xcalloc(n, sizeof(int));
    return v;
}

RVecD *rt_copy_d(const RVecD *x) {
    RVecD *v = rt_vec_d(x->len);
    memcpy(v->d, x->d, x->len * sizeof(double));
    v->nrow = x->nrow;
    v->ncol = x->ncol;
    return v;
}

RVecI *rt_copy_i(const RVecI *x) {
    RVecI *v = rt_vec_i(x->len);
    memcpy(v->d, x->d, x->len * sizeof(int));
    v->nrow = x->nrow;
    v->ncol = x->ncol;
    return v;
}

RVecD *rt_as_vec_d(const RVecI *x) {
    RVecD *v = rt_vec_d(x->len);
    for (long i = 0; i < x->len; i++) v->d[i] = x->d[i];
    v->nrow = x->nrow;
    v->ncol = x->ncol;
    return v;
}

RVecD *rt_scalar_d(double x) { return rt_rep_d(x, 1); }

RVecD *rt_rep_d(double x, long n) {
    RVecD *v = rt_vec_d(n);
    for (long i = 0; i < n; i++) v->d[i] = x;
    return v;
}

RVecI *rt_rep_i(int x, long n) {
    RVecI *v = rt_vec_i(n);
    for (long i = 0; i < n; i++) v->d[i] = x;
    return v;
}

RVecD *rt_runif(long n) {
    RVecD *v = rt_vec_d(n);
    for (long i = 0; i < n; i++) v->d[i] = rt_unif();
    return v;
}

RVecD *rt_rnorm(long n) {
    RVecD *v = rt_vec_d(n);
    for (long i = 0; i < n; i++) v->d[i] = rt_norm();
    return v;
}

static long colon_count(double a, double b) { return (long)floor(fabs(b - a) + 1e-10) + 1; }

RVecI *rt_seq_i(double a, double b) {
    long n = colon_count(a, b), st = b >= a ? 1 : -1;
    RVecI *v = rt_vec_i(n);
    for (long k = 0; k < n; k++) v->d[k] = (int)a + (int)(st * k);
    return v;
}

RVecD *rt_matrix_d(RVecD *data, long nr, long nc) {
    RVecD *m;
    if (data->len == nr * nc) {
        m = data;
    } else {
        if (data->len == 0) rt_fail("matrix: empty data");
        m = rt_vec_d(nr * nc);
        for (long i = 0; i < nr * nc; i++) m->d[i] = data->d[i % data->len];
    }
    m->nrow = nr;
    m->ncol = nc;
    return m;
}

static long *sample_index(long k, long size, int replace) {
    long *out = xcalloc(size, sizeof(long));
    if (replace) {
        for (long i = 0; i < size; i++) out[i] = (long)rt_unif_int((uint64_t)k);
        return out;
    }
    if (size > k) rt_fail("cannot take a sample larger than the population when 'replace = FALSE'");
    long *idx = xcalloc(k, sizeof(long));
    for (long i = 0; i < k; i++) idx[i] = i;
    for (long i = 0; i < size; i++) {
        long j = i + (long)rt_unif_int((uint64_t)(k - i));
        long t = idx[i];
        idx[i] = idx[j];
        idx[j] = t;
    }
    memcpy(out, idx, size * sizeof(long));
    free(idx);
    return out;
}

RVecI *rt_sample_i(const RVecI *x, long size, int replace) {
    if (size < 0) size = x->len;
    if (x->len == 0 && size > 0) rt_fail("cannot sample from an empty population");
    long *idx = sample_index(x->len, size, replace);
    RVecI *v = rt_vec_i(size);
    for (long i = 0; i < size; i++) v->d[i] = x->d[idx[i]];
    free(idx);
    return v;
}

RVecD *rt_sample_d(const RVecD *x, long size, int replace) {
    if (size < 0) size = x->len;
    if (x->len == 0 && size > 0) rt_fail("cannot sample from an empty population");
    long *idx = sample_index(x->len, size, replace);
    RVecD *v = rt_vec_d(size);
    for (long i = 0; i < size; i++) v->d[i] = x->d[idx[i]];
    free(idx);
    return v;
}

static int cmp_i(const void *a, const void *b) {
    int x = *(const int *)a, y = *(const int *)b;
    return (x > y) - (x < y);
}

static int cmp_d(const void *a, const void *b) {
    double x = *(const double *)a, y = *(const double *)b;
    return (x > y) - (x < y);
}

RVecI *rt_sort_i(const RVecI *x) {
    RVecI *v = rt_copy_i(x);
    v->nrow = v->ncol = 0;
    qsort(v->d, v->len, sizeof(int), cmp_i);
    return v;
}

RVecD *rt_sort_d(const RVecD *x) {
    RVecD *v = rt_copy_d(x);
    v->nrow = v->ncol = 0;
    qsort(v->d, v->len, sizeof(double), cmp_d);
    return v;
}

static void check_range(long len, double a, double b) {
    double lo = a < b ? a : b, hi = a < b ? b : a;
    if (lo < 1 || hi > len) rt_fail("subscript out of bounds");
}

RVecD *rt_slice_d(const RVecD *x, double a, double b) {
    long n = colon_count(a, b), st = b >= a ? 1 : -1, s = (long)a - 1;
    check_range(x->len, a, a + st * (n - 1));
    RVecD *v = rt_vec_d(n);
    for (long k = 0; k < n; k++) v->d[k] = x->d[s + st * k];
    return v;
}

RVecI *rt_slice_i(const RVecI *x, double a, double b) {
    long n = colon_count(a, b), st = b >= a ? 1 : -1, s = (long)a - 1;
    check_range(x->len, a, a + st * (n - 1));
    RVecI *v = rt_vec_i(n);
    for (long k = 0; k < n; k++) v->d[k] = x->d[s + st * k];
    return v;
}

RVecD *rt_drop_first_d(const RVecD *x) {
    long n = x->len > 0 ? x->len - 1 : 0;
    RVecD *v = rt_vec_d(n);
    if (n) memcpy(v->d, x->d + 1, n * sizeof(double));
    return v;
}

RVecI *rt_drop_first_i(const RVecI *x) {
    long n = x->len > 0 ? x->len - 1 : 0;
    RVecI *v = rt_vec_i(n);
    if (n) memcpy(v->d, x->d + 1, n * sizeof(int));
    return v;
}

/* -- arithmetic ----------------------------------------------------------- */

int rt_mod_i(int a, int b) {
    if (b == 0) rt_fail("integer modulo by zero is NA");
    int r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? r + b : r;
}

double rt_mod_d(double a, double b) {
    double r = fmod(a, b);
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
}

int rt_idiv_i(int a, int b) {
    if (b == 0) rt_fail("integer division by zero is NA");
    int q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

double rt_idiv_d(double a, double b) { return floor(a / b); }

double rt_pow(double a, double b) {
    if (b == 0 || a == 1) return 1.0;
    return pow(a, b);
}

static double op_d(int op, double x, double y) {
    switch (op) {
    case RT_ADD: return x + y;
    case RT_SUB: return x - y;
    case RT_MUL: return x * y;
    case RT_DIV: return x / y;
    case RT_POW: return rt_pow(x, y);
    case RT_MOD: return rt_mod_d(x, y);
    default: return rt_idiv_d(x, y);
    }
}

static long out_len(long la, long lb) {
    if (la == lb) return la;
    if (la == 0 || lb == 0) return 0;
    if (la == 1) return lb;
    if (lb == 1) return la;
    rt_fail("operands have different lengths; general recycling is not supported");
    return 0;
}

RVecD *rt_vop_d(int op, const RVecD *a, const RVecD *b) {
    long n = out_len(a->len, b->len);
    RVecD *v = rt_vec_d(n);
    for (long i = 0; i < n; i++)
        v->d[i] = op_d(op, a->d[a->len == 1 ? 0 : i], b->d[b->len == 1 ? 0 : i]);
    const RVecD *shape = a->nrow ? a : b;
    v->nrow = shape->nrow;
    v->ncol = shape->ncol;
    return v;
}

RVecI *rt_vop_i(int op, const RVecI *a, const RVecI *b) {
    long n = out_len(a->len, b->len);
    RVecI *v = rt_vec_i(n);
    for (long i = 0; i < n; i++) {
        int x = a->d[a->len == 1 ? 0 : i], y = b->d[b->len == 1 ? 0 : i];
        switch (op) {
        case RT_ADD: v->d[i] = x + y; break;
        case RT_SUB: v->d[i] = x - y; break;
        case RT_MUL: v->d[i] = x * y; break;
        case RT_MOD: v->d[i] = rt_mod_i(x, y); break;
        case RT_IDIV: v->d[i] = rt_idiv_i(x, y); break;
        default: rt_fail("invalid integer vector operator");
        }
    }
    const RVecI *shape = a->nrow ? a : b;
    v->nrow = shape->nrow;
    v->ncol = shape->ncol;
    return v;
}

RVecD *rt_vmath_d(const char *fn, const RVecD *x) {
    double (*f)(double);
    if (strcmp(fn, "sqrt") == 0) f = sqrt;
    else if (strcmp(fn, "fabs") == 0) f = fabs;
    else if (strcmp(fn, "exp") == 0) f = exp;
    else if (strcmp(fn, "log") == 0) f = log;
    else if (strcmp(fn, "floor") == 0) f = floor;
    else if (strcmp(fn, "ceil") == 0) f = ceil;
    else { rt_fail("unknown math function"); return NULL; }
    RVecD *v = rt_copy_d(x);
    for (long i = 0; i < v->len; i++) v->d[i] = f(v->d[i]);
    return v;
}

RVecD *rt_neg_d(const RVecD *x) {
    RVecD *v = rt_copy_d(x);
    for (long i = 0; i < v->len; i++) v->d[i] = -v->d[i];
    return v;
}

/* -- summaries ------------------------------------------------------------ */

double rt_sum_d(const RVecD *x) {
    double acc = 0.0;
    for (long i = 0; i < x->len; i++) acc += x->d[i];
    return acc;
}

int rt_sum_i(const RVecI *x) {
    long long acc = 0;
    for (long i = 0; i < x->len; i++) acc += x->d[i];
    if (acc > 2147483647LL || acc < -2147483647LL) rt_fail("integer overflow in sum");
    return (int)acc;
}

double rt_sum_range_d(const RVecD *x, double a, double b) {
    long n = colon_count(a, b), st = b >= a ? 1 : -1, s = (long)a - 1;
    check_range(x->len, a, a + st * (n - 1));
    double acc = 0.0;
    for (long k = 0; k < n; k++) acc += x->d[s + st * k];
    return acc;
}

int rt_sum_range_i(const RVecI *x, double a, double b) {
    long n = colon_count(a, b), st = b >= a ? 1 : -1, s = (long)a - 1;
    check_range(x->len, a, a + st * (n - 1));
    long long acc = 0;
    for (long k = 0; k < n; k++) acc += x->d[s + st * k];
    if (acc > 2147483647LL || acc < -2147483647LL) rt_fail("integer overflow in sum");
    return (int)acc;
}

double rt_mean_d(const RVecD *x) {
    if (x->len == 0) return NAN;
    return rt_sum_d(x) / (double)x->len;
}

double rt_mean_i(const RVecI *x) {
    if (x->len == 0) return NAN;
    double acc = 0.0;
    for (long i = 0; i < x->len; i++) acc += (double)x->d[i];
    return acc / (double)x->len;
}

/* -- printing ------------------------------------------------------------- */

static void fmt_double(char *buf, size_t n, double x) {
    if (isnan(x)) snprintf(buf, n, "NaN");
    else if (isinf(x)) snprintf(buf, n, x > 0 ? "Inf" : "-Inf");
    else {
        snprintf(buf, n, "%.15g", x);
        if (strcmp(buf, "-0") == 0) snprintf(buf, n, "0");
    }
}

#define CELL 32

static void print_cells(char (*cells)[CELL], long n, const char *empty) {
    if (n == 0) {
        printf("%s\n", empty);
        return;
    }
    int w = 0;
    for (long i = 0; i < n; i++) {
        int l = (int)strlen(cells[i]);
        if (l > w) w = l;
    }
    char lab[32];
    snprintf(lab, sizeof lab, "[%ld]", n);
    int labw = (int)strlen(lab);
    long per = (WIDTH - labw) / (w + 1);
    if (per < 1) per = 1;
    for (long start = 0; start < n; start += per) {
        snprintf(lab, sizeof lab, "[%ld]", start + 1);
        printf("%*s", labw, lab);
        for (long i = start; i < n && i < start + per; i++) printf(" %*s", w, cells[i]);
        printf("\n");
    }
}

void rt_print_d(double x) {
    char c[1][CELL];
    fmt_double(c[0], CELL, x);
    print_cells(c, 1, "numeric(0)");
}

void rt_print_i(int x) {
    char c[1][CELL];
    snprintf(c[0], CELL, "%d", x);
    print_cells(c, 1, "integer(0)");
}

void rt_print_l(int x) {
    char c[1][CELL];
    snprintf(c[0], CELL, "%s", x ? "TRUE" : "FALSE");
    print_cells(c, 1, "logical(0)");
}

void rt_print_vec_d(const RVecD *x) {
    char (*c)[CELL] = xcalloc(x->len, CELL);
    for (long i = 0; i < x->len; i++) fmt_double(c[i], CELL, x->d[i]);
    print_cells(c, x->len, "numeric(0)");
    free(c);
}

void rt_print_vec_i(const RVecI *x) {
    char (*c)[CELL] = xcalloc(x->len, CELL);
    for (long i = 0; i < x->len; i++) snprintf(c[i], CELL, "%d", x->d[i]);
    print_cells(c, x->len, "integer(0)");
    free(c);
}

void rt_print_vec_l(const RVecI *x) {
    char (*c)[CELL] = xcalloc(x->len, CELL);
    for (long i = 0; i < x->len; i++) snprintf(c[i], CELL, "%s", x->d[i] ? "TRUE" : "FALSE");
    print_cells(c, x->len, "logical(0)");
    free(c);
}

/* -- timing --------------------------------------------------------------- */

double rt_now(void) {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return ts.tv_sec + ts.tv_nsec * 1e-9;
}

void rt_report_time(const char *key, double secs) {
    fprintf(stderr, "system.time %s %.6f\n", key, secs);
}
