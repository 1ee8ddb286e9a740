#include "sampsize/optimize.hpp"

#include <cmath>
#include <limits>

#include "sampsize/error.hpp"

namespace sampsize::optimize {

Minimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol,
                       int max_iterations) {
    if (!(hi >= lo)) throw DomainError("golden_section: empty bracket");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    int it = 0;
    while (b - a > tol) {
        if (++it > max_iterations) {
            const double x = fc < fd ? c : d;
            throw SolverError("golden-section search exhausted its iterations", x, std::fmin(fc, fd), it);
        }
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // The endpoints themselves may be optimal (e.g. a monotone objective).
    Minimum best{fc <= fd ? c : d, std::fmin(fc, fd), it};
    for (double edge : {lo, hi}) {
        if (std::fabs(edge - best.x) <= 2.0 * tol) {
            const double fe = f(edge);
            if (fe < best.value) best = {edge, fe, it};
        }
    }
    return best;
}

Minimum brent(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iterations) {
    if (!(hi > lo)) throw DomainError("brent: empty bracket");
    const double golden = (3.0 - std::sqrt(5.0)) * 0.5;
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

    double a = lo;
    double b = hi;
    double v = a + golden * (b - a);
    double w = v;
    double x = v;
    double d = 0.0;
    double e = 0.0;
    double fx = f(x);
    double fv = fx;
    double fw = fx;
    const double tol3 = tol / 3.0;

    for (int it = 0;; ++it) {
        const double xm = 0.5 * (a + b);
        const double tol1 = eps * std::fabs(x) + tol3;
        const double t2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= t2 - 0.5 * (b - a)) return {x, fx, it};
        if (it >= max_iterations) throw SolverError("brent minimization exhausted its iterations", x, fx, it);

        double p = 0.0;
        double q = 0.0;
        double r = 0.0;
        if (std::fabs(e) > tol1) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p; else q = -q;
            r = e;
            e = d;
        }
        if (std::fabs(p) >= std::fabs(0.5 * q * r) || p <= q * (a - x) || p >= q * (b - x)) {
            e = x < xm ? b - x : a - x;
            d = golden * e;
        } else {
            d = p / q;
            const double u = x + d;
            if (u - a < t2 || b - u < t2) d = x < xm ? tol1 : -tol1;
        }

        double u;
        if (std::fabs(d) >= tol1) u = x + d;
        else if (d > 0.0) u = x + tol1;
        else u = x - tol1;
        const double fu = f(u);

        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
}

}  // namespace sampsize::optimize
