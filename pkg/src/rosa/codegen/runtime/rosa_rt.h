/* Runtime support for programs emitted by rosa's C backend. */
#ifndef ROSA_RT_H
#define ROSA_RT_H

#include <math.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>

typedef struct { long len, nrow, ncol; double *d; } RVecD;
typedef struct { long len, nrow, ncol; int *d; } RVecI;

typedef int integer;
typedef int logical;
typedef RVecD *vec_double;
typedef RVecD *mat_double;
typedef RVecI *vec_integer;
typedef RVecI *vec_logical;
typedef RVecI *mat_integer;

enum { RT_ADD, RT_SUB, RT_MUL, RT_DIV, RT_POW, RT_MOD, RT_IDIV };

void rt_init(int argc, char **argv);
double rt_arg_d(const char *name, double dflt);
int rt_arg_i(const char *name, int dflt);
void rt_fail(const char *msg);

/* shared deterministic generator */
uint64_t rt_next(void);
double rt_unif(void);
uint64_t rt_unif_int(uint64_t k);
double rt_norm(void);
double rt_beta(double a, double b);

/* allocation */
RVecD *rt_vec_d(long n);
RVecI *rt_vec_i(long n);
RVecD *rt_copy_d(const RVecD *x);
RVecI *rt_copy_i(const RVecI *x);
RVecD *rt_as_vec_d(const RVecI *x);
RVecD *rt_scalar_d(double x);
RVecD *rt_rep_d(double x, long n);
RVecI *rt_rep_i(int x, long n);
RVecD *rt_runif(long n);
RVecD *rt_rnorm(long n);
RVecI *rt_seq_i(double a, double b);
RVecD *rt_matrix_d(RVecD *data, long nr, long nc);
RVecI *rt_sample_i(const RVecI *x, long size, int replace);
RVecD *rt_sample_d(const RVecD *x, long size, int replace);
RVecI *rt_sort_i(const RVecI *x);
RVecD *rt_sort_d(const RVecD *x);
RVecD *rt_slice_d(const RVecD *x, double a, double b);
RVecI *rt_slice_i(const RVecI *x, double a, double b);
RVecD *rt_drop_first_d(const RVecD *x);
RVecI *rt_drop_first_i(const RVecI *x);

/* arithmetic */
int rt_mod_i(int a, int b);
double rt_mod_d(double a, double b);
int rt_idiv_i(int a, int b);
double rt_idiv_d(double a, double b);
double rt_pow(double a, double b);
RVecD *rt_vop_d(int op, const RVecD *a, const RVecD *b);
RVecI *rt_vop_i(int op, const RVecI *a, const RVecI *b);
RVecD *rt_vmath_d(const char *fn, const RVecD *x);
RVecD *rt_neg_d(const RVecD *x);

/* summaries */
double rt_sum_d(const RVecD *x);
int rt_sum_i(const RVecI *x);
double rt_sum_range_d(const RVecD *x, double a, double b);
int rt_sum_range_i(const RVecI *x, double a, double b);
double rt_mean_d(const RVecD *x);
double rt_mean_i(const RVecI *x);

/* printing (format shared with the interpreter) */
void rt_print_d(double x);
void rt_print_i(int x);
void rt_print_l(int x);
void rt_print_vec_d(const RVecD *x);
void rt_print_vec_i(const RVecI *x);
void rt_print_vec_l(const RVecI *x);

/* timing; reported on stderr so stdout stays comparable */
double rt_now(void);
void rt_report_time(const char *key, double secs);

#endif
