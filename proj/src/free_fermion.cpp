#include "phasekit/free_fermion.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "phasekit/model.hpp"

namespace phasekit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAbsTol = 1e-10;

// J^2 + Gamma^2 - 2 J Gamma cos k without the cancellation near Gamma = J
double radicand(double j, double gamma, double k) {
    const double s = std::sin(0.5 * k);
    return std::max((j - gamma) * (j - gamma) + 4.0 * j * gamma * s * s, 0.0);
}

// Near Gamma = J the integrands vary on the scale |Gamma - J| / sqrt(J Gamma)
// around k = 0; breakpoints at growing multiples of that scale keep each
// panel smooth.
template <class F>
double integrate_0_pi(F&& f, double j, double gamma, const char* what) {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> cuts{0.0};
    const double jg = std::abs(j * gamma);
    if (jg > 0.0) {
        for (double k = std::abs(j - gamma) / std::sqrt(jg); k < 0.5 * kPi; k *= 4.0) {
            if (k > 1e-12) cuts.push_back(k);
            if (k == 0.0) break;
        }
    }
    cuts.push_back(kPi);

    double value = 0.0, error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        // Each panel aims at an absolute 1e-13; boost measures tolerance
        // relative to the panel's L1 norm, so rescale by a rough estimate.
        const double scale = (b - a) * std::max({std::abs(f(a)), std::abs(f(0.5 * (a + b))), std::abs(f(b))});
        const double rel = std::clamp(1e-13 / std::max(scale, 1e-300), 1e-12, 1e-3);
        double e = 0.0;
        value += gauss_kronrod<double, 61>::integrate(f, a, b, 12, rel, &e);
        error += e;
    }
    if (!(error <= kAbsTol) || !std::isfinite(value)) {
        std::ostringstream os;
        os << what << ": quadrature did not converge, achieved error " << error;
        throw ConvergenceError(os.str());
    }
    return value;
}

}  // namespace

double ff_dispersion(double j, double h, double k) {
    return 2.0 * std::sqrt(radicand(j, 0.5 * h, k));
}

// Rotating every other spin by pi about x maps J -> -J, and a global pi
// rotation about z maps h -> -h, so the quadrature only ever sees J, h > 0
// with the cusp of the Gamma = J point at k = 0.
double ff_ground_energy(double j, double h) {
    j = std::abs(j);
    h = std::abs(h);
    if (j == 0.0 || h == 0.0) return -std::max(j, 0.5 * h);
    return -integrate_0_pi([&](double k) { return ff_dispersion(j, h, k); }, j, 0.5 * h, "ff_ground_energy") / (2.0 * kPi);
}

double ff_mx(double j, double h) {
    if (h == 0.0) return 0.0;
    const double sign = h > 0.0 ? 1.0 : -1.0;
    j = std::abs(j);
    if (j == 0.0) return 0.5 * sign;
    const double gamma = 0.5 * std::abs(h);
    // d eps_k / d h = (Gamma - J cos k) / sqrt(J^2 + Gamma^2 - 2 J Gamma cos k)
    auto integrand = [&](double k) {
        const double r = std::sqrt(radicand(j, gamma, k));
        const double s = std::sin(0.5 * k);
        return r > 0.0 ? ((gamma - j) + 2.0 * j * s * s) / r : 0.0;  // Gamma - J cos k without cancellation
    };
    return sign * integrate_0_pi(integrand, j, gamma, "ff_mx") / (2.0 * kPi);
}

double ff_order_parameter(double j, double h) {
    const double ratio = 0.5 * std::abs(h) / std::abs(j);
    if (j == 0.0 || ratio >= 1.0) return 0.0;
    return 0.5 * std::pow(1.0 - ratio * ratio, 0.125);
}

}  // namespace phasekit
