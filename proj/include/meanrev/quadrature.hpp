#pragma once

// Adaptive Gauss-Kronrod (G7,K15) integration on a finite interval.
//
// Worst-segment-first refinement: keep a heap of segments ordered by error
// estimate, split the worst one until the summed error estimate meets the
// requested tolerance or the panel budget runs out. The K15 rule gives the
// value, |K15 - G7| the error estimate.

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace meanrev::quad {

struct Result {
    double value     = 0.0;
    double abs_error = 0.0;   // summed per-segment estimates
    int    panels    = 0;     // K15 applications
    bool   converged = false;
};

namespace detail {

// QUADPACK qk15 abscissae/weights on [-1, 1]; symmetric, only the
// nonnegative half stored. wg are the embedded 7-point Gauss weights.
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, err;
    bool operator<(const Segment& o) const { return err < o.err; }  // max-heap
};

template <class F>
Segment eval_gk15(F&& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double kron = wgk[7] * f(c), gauss = wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * xgk[i];
        const double fs = f(c - dx) + f(c + dx);
        kron += wgk[i] * fs;
        if (i % 2 == 1) gauss += wg[i / 2] * fs;
    }
    kron *= h;
    gauss *= h;
    return {lo, hi, kron, std::abs(kron - gauss)};
}

}  // namespace detail

/// Integrate f over [lo, hi] to |error| <= max(abs_tol, rel_tol*|result|).
/// max_panels caps the refinement (spec'd budget: 2^20).
template <class F>
Result integrate(F&& f, double lo, double hi, double rel_tol,
                 double abs_tol = 0.0, int max_panels = 1 << 20) {
    Result out;
    if (lo == hi) {
        out.converged = true;
        return out;
    }
    const double sign = lo < hi ? 1.0 : -1.0;
    if (sign < 0) std::swap(lo, hi);

    std::priority_queue<detail::Segment> heap;
    auto seed = detail::eval_gk15(f, lo, hi);
    double total = seed.value, total_err = seed.err;
    heap.push(seed);
    out.panels = 1;

    auto good_enough = [&] {
        return total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    };
    while (!good_enough() && out.panels < max_panels && !heap.empty()) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) continue;  // interval exhausted
        auto l = detail::eval_gk15(f, worst.lo, mid);
        auto r = detail::eval_gk15(f, mid, worst.hi);
        total += l.value + r.value - worst.value;
        total_err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        out.panels += 2;
    }
    out.value = sign * total;
    out.abs_error = total_err;
    out.converged = good_enough();
    return out;
}

}  // namespace meanrev::quad
