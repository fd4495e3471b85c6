#include "despeckle/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace despeckle {
namespace {

struct AdaptState {
    const std::function<double(double)>& f;
    double noise_floor = 0.0;
    long evaluations = 0;
    bool converged = true;
    double error_sum = 0.0;

    double eval(double x) {
        ++evaluations;
        return f(x);
    }
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(AdaptState& st, double a, double b, double fa, double fm, double fb,
             double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.eval(lm);
    const double frm = st.eval(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    // Never demand a panel correction finer than rounding noise on the whole
    // integral: integrable endpoint singularities would otherwise keep a
    // shrinking tolerance out of reach at any depth.
    const double accept = 15.0 * std::max(tol, st.noise_floor);
    if (std::fabs(delta) <= accept || depth <= 0) {
        if (depth <= 0 && std::fabs(delta) > accept) st.converged = false;
        st.error_sum += std::fabs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adapt(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::span<const double> panel_edges,
                                    double rel_tol, double abs_tol, int max_depth) {
    const std::size_t panels = panel_edges.empty() ? 0 : panel_edges.size() - 1;
    if (panels < 1) {
        throw std::invalid_argument("integrate_adaptive: need at least one panel");
    }
    for (std::size_t i = 0; i + 1 < panel_edges.size(); ++i) {
        if (!(panel_edges[i] < panel_edges[i + 1]) || !std::isfinite(panel_edges[i]) ||
            !std::isfinite(panel_edges[i + 1])) {
            throw std::invalid_argument("integrate_adaptive: edges must increase strictly");
        }
    }
    AdaptState st{f};

    // Coarse composite pass to estimate the magnitude of the integral and to
    // cache panel endpoint values for the adaptive stage.
    std::vector<double> xs(2 * panels + 1);
    std::vector<double> fs(2 * panels + 1);
    for (std::size_t i = 0; i < panels; ++i) {
        xs[2 * i] = panel_edges[i];
        xs[2 * i + 1] = 0.5 * (panel_edges[i] + panel_edges[i + 1]);
    }
    xs[2 * panels] = panel_edges[panels];
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = st.eval(xs[i]);

    double coarse = 0.0;
    std::vector<double> panel(panels);
    for (std::size_t i = 0; i < panels; ++i) {
        panel[i] = simpson(xs[2 * i], xs[2 * i + 2], fs[2 * i], fs[2 * i + 1], fs[2 * i + 2]);
        coarse += panel[i];
    }

    const double tol = std::max(abs_tol, rel_tol * std::fabs(coarse));
    st.noise_floor = 2.5e-16 * std::fabs(coarse);
    QuadratureResult result;
    for (std::size_t i = 0; i < panels; ++i) {
        result.value += adapt(st, xs[2 * i], xs[2 * i + 2], fs[2 * i], fs[2 * i + 1],
                              fs[2 * i + 2], panel[i], tol / static_cast<double>(panels),
                              max_depth);
    }
    result.error_estimate = st.error_sum;
    result.converged = st.converged;
    result.evaluations = st.evaluations;
    return result;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo, double hi,
                                    double rel_tol, double abs_tol, int max_depth) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("integrate_adaptive: bad interval");
    }
    constexpr int kSeedPanels = 8;
    double edges[kSeedPanels + 1];
    for (int i = 0; i <= kSeedPanels; ++i) {
        edges[i] = lo + (hi - lo) * i / kSeedPanels;
    }
    edges[kSeedPanels] = hi;
    return integrate_adaptive(f, std::span<const double>(edges, kSeedPanels + 1),
                              rel_tol, abs_tol, max_depth);
}

}  // namespace despeckle
