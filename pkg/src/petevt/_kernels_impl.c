/* Numeric loops behind petevt._kernels.
 *
 * The loops are written so GCC can vectorize them against glibc's libmvec
 * (exp, log, log1p); target_clones selects the widest ISA at load time.
 * Built with -fno-math-errno -fno-trapping-math -fopenmp-simd (the last two
 * let simd clones of libm calls be used); IEEE infinities are preserved.
 */
#include <math.h>

#include "_kernels_impl.h"

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__linux__) \
    && !defined(PETEVT_NO_SIMD)
#define PK_SIMD_DECL __attribute__((simd("notinbranch"), const, nothrow, leaf))
PK_SIMD_DECL double exp(double);
PK_SIMD_DECL double log(double);
PK_SIMD_DECL double log1p(double);
#define PK_CLONES __attribute__((target_clones("avx512f", "avx2", "default")))
#else
#define PK_CLONES
#endif

#define PK_SMALL_SHAPE 1e-8
#define PK_LOG2 0.6931471805599453

PK_CLONES
double pk_gpd_loglik_sum(const double *y, ptrdiff_t n, double scale, double xi)
{
    double acc = 0.0, inv_s = 1.0 / scale, rmin = INFINITY;
    ptrdiff_t i;
    if (n == 0)
        return 0.0;
    if (fabs(xi) < PK_SMALL_SHAPE) {
#pragma omp simd reduction(+:acc)
        for (i = 0; i < n; i++)
            acc += y[i];
        return -(double)n * log(scale) - acc * inv_s;
    }
#pragma omp simd reduction(min:rmin)
    for (i = 0; i < n; i++) {
        double r = xi * y[i] * inv_s;
        rmin = r < rmin ? r : rmin;
    }
    if (rmin <= -1.0)
        return -INFINITY;
#pragma omp simd reduction(+:acc)
    for (i = 0; i < n; i++)
        acc += log1p(xi * y[i] * inv_s);
    return -(double)n * log(scale) - (1.0 + 1.0 / xi) * acc;
}

static inline void frechet_point(double y, double w, double wx, double log_lam,
                                 double log_s, double *lz, double *logj, double *logd)
{
    double logtail = log_lam - wx;
    double tail = exp(logtail);
    double logf = log1p(-tail);
    /* log(-log F) loses precision once tail underflows; use its series */
    double big = log(-logf);
    double lmlf = tail > 1e-10 ? big : logtail + 0.5 * tail;
    double ld = logtail - log_s - w;
    *lz = -lmlf;
    *logd = ld;
    *logj = -2.0 * lmlf - logf + ld;
}

PK_CLONES
void pk_frechet_transform(const double *y, ptrdiff_t n, double scale, double xi,
                          double lam, double *lz, double *logj, double *logd)
{
    double inv_s = 1.0 / scale, log_lam = log(lam), log_s = log(scale);
    ptrdiff_t i;
    if (fabs(xi) < PK_SMALL_SHAPE) {
#pragma omp simd
        for (i = 0; i < n; i++)
            frechet_point(y[i], xi * y[i] * inv_s, y[i] * inv_s, log_lam, log_s,
                          lz + i, logj + i, logd + i);
    } else {
        double inv_xi = 1.0 / xi;
#pragma omp simd
        for (i = 0; i < n; i++) {
            double w = log1p(xi * y[i] * inv_s);
            frechet_point(y[i], w, w * inv_xi, log_lam, log_s,
                          lz + i, logj + i, logd + i);
        }
    }
}

/* Exceedances are stored in series order, so a pair of consecutive
 * exceeding observations is always (j, j + 1) in the exceedance arrays.
 * pair_next[j] is 1 when such a pair exists, n_cens[j] counts censored
 * neighbours of exceedance j inside its segment and weight[j] is its signed
 * marginal multiplicity. */
PK_CLONES
double pk_markov_period_loglik(const double *lz, const double *logj,
                               const double *logd, ptrdiff_t n_exc,
                               const double *pair_next, const double *n_cens,
                               const double *weight, double alpha, double lz_u,
                               ptrdiff_t n00)
{
    double inv_a = 1.0 / alpha;
    double c = (1.0 - alpha) * inv_a;
    double am2 = alpha - 2.0, am1 = alpha - 1.0;
    double acc_b = 0.0, acc_o = 0.0;
    double la_u = -lz_u * inv_a;
    ptrdiff_t k;

#pragma omp simd reduction(+:acc_b)
    for (k = 0; k < n_exc - 1; k++) {
        double lz1 = lz[k], lz2 = lz[k + 1];
        double la1 = -lz1 * inv_a, la2 = -lz2 * inv_a;
        double d = la1 - la2;
        double m = d > 0.0 ? la1 : la2;
        double logs = m + log1p(exp(-fabs(d)));
        double sa = exp(alpha * logs);
        double term = la1 + la2 - lz1 - lz2 - sa + am2 * logs + log(sa + c)
                      + logj[k] + logj[k + 1];
        acc_b += pair_next[k] > 0.0 ? term : 0.0;
    }

#pragma omp simd reduction(+:acc_o)
    for (k = 0; k < n_exc; k++) {
        double lz1 = lz[k];
        double la1 = -lz1 * inv_a;
        double d = la1 - la_u;
        double m = d > 0.0 ? la1 : la_u;
        double logs = m + log1p(exp(-fabs(d)));
        double sa = exp(alpha * logs);
        double term = la1 - lz1 - sa + am1 * logs + logj[k];
        acc_o += n_cens[k] * term + weight[k] * logd[k];
    }

    return acc_b + acc_o - (double)n00 * exp(alpha * PK_LOG2 - lz_u);
}

/* log P(Z2 <= e^v | Z1 = e^lz1) for the logistic model; *dlog gets its
 * derivative in v. */
static double log_cond_cdf(double v, double lz1, double alpha, double inv_a,
                           double inv_z1, double *dlog)
{
    double la1 = -lz1 * inv_a, la2 = -v * inv_a;
    double d = la1 - la2;
    double m = d > 0.0 ? la1 : la2;
    double e = exp(-fabs(d));
    double logs = m + log1p(e);
    double sa = exp(alpha * logs);
    double p2 = d > 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
    *dlog = p2 * (sa + (1.0 - alpha) * inv_a);
    return -sa + inv_z1 + (alpha - 1.0) * logs + la1 + lz1;
}

double pk_invert_conditional(double target, double lz1, double alpha, double tol)
{
    double inv_a = 1.0 / alpha, inv_z1 = exp(-lz1);
    double lo = lz1 - 1.0, hi = lz1 + 1.0, width, v, h, dlog, step, vn;
    int it;

    while (exp(log_cond_cdf(lo, lz1, alpha, inv_a, inv_z1, &dlog)) > target) {
        width = hi - lo;
        hi = lo;
        lo -= 2.0 * width;
    }
    while (exp(log_cond_cdf(hi, lz1, alpha, inv_a, inv_z1, &dlog)) < target) {
        width = hi - lo;
        lo = hi;
        hi += 2.0 * width;
    }
    v = 0.5 * (lo + hi);
    for (it = 0; it < 400; it++) {
        h = exp(log_cond_cdf(v, lz1, alpha, inv_a, inv_z1, &dlog));
        if (fabs(h - target) <= tol)
            return v;
        if (h < target)
            lo = v;
        else
            hi = v;
        /* Newton in v; bisect whenever the step leaves the bracket */
        step = h * dlog > 0.0 ? (h - target) / (h * dlog) : 0.0;
        vn = v - step;
        if (step == 0.0 || vn <= lo || vn >= hi)
            vn = 0.5 * (lo + hi);
        if (vn == v)
            return v;
        v = vn;
    }
    return v;
}
