#ifndef PETEVT_KERNELS_IMPL_H
#define PETEVT_KERNELS_IMPL_H

#include <stddef.h>
#include <stdint.h>

double pk_gpd_loglik_sum(const double *y, ptrdiff_t n, double scale, double xi);

void pk_frechet_transform(const double *y, ptrdiff_t n, double scale, double xi,
                          double lam, double *lz, double *logj, double *logd);

double pk_markov_period_loglik(const double *lz, const double *logj,
                               const double *logd, ptrdiff_t n_exc,
                               const double *pair_next, const double *n_cens,
                               const double *weight, double alpha, double lz_u,
                               ptrdiff_t n00);

double pk_invert_conditional(double target, double lz1, double alpha, double tol);

#endif
