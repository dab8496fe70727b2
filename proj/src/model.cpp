#include "phasekit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phasekit {

std::string_view to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::PM_N: return "PM-N";
        case PhaseLabel::PM_S: return "PM-S";
        case PhaseLabel::AFM_N: return "AFM-N";
        case PhaseLabel::AFM_S: return "AFM-S";
    }
    return "?";
}

PhaseLabel phase_label_from_string(std::string_view text) {
    if (text == "PM-N") return PhaseLabel::PM_N;
    if (text == "PM-S") return PhaseLabel::PM_S;
    if (text == "AFM-N") return PhaseLabel::AFM_N;
    if (text == "AFM-S") return PhaseLabel::AFM_S;
    throw ParamError("unknown phase label '" + std::string(text) + "'");
}

void ToleranceSet::validate() const {
    if (!(tol_order_param > 0.0)) throw ParamError("tol_order_param must be positive");
    if (!(tol_energy > 0.0)) throw ParamError("tol_energy must be positive");
    if (!(tol_jump > 0.0)) throw ParamError("tol_jump must be positive");
    if (!(tol_jump > tol_order_param)) throw ParamError("tol_jump must exceed tol_order_param");
}

const ModelParams& validate_params(const ModelParams& p) {
    if (!std::isfinite(p.omega) || !std::isfinite(p.eps) || !std::isfinite(p.g) || !std::isfinite(p.j))
        throw ParamError("parameters must be finite");
    if (!(p.omega > 0.0)) throw ParamError("omega must be positive");
    if (p.eps < 0.0) throw ParamError("eps must be nonnegative");
    if (p.g < 0.0) throw ParamError("g must be nonnegative");
    return p;
}

ClassicalGround classical_ground(const ModelParams& p) {
    validate_params(p);
    if (p.g != 0.0) throw ParamError("classical_ground requires g = 0");

    const double e_pol = -0.5 * p.eps - p.j;
    const double e_neel = p.j;
    const double scale = std::max({1.0, std::abs(e_pol), std::abs(e_neel)});
    const double tie = 8.0 * std::numeric_limits<double>::epsilon() * scale;

    ClassicalGround out;
    if (std::abs(e_pol - e_neel) <= tie) {
        out.energy = e_pol;
        out.label = PhaseLabel::PM_N;
        out.degenerate = true;
    } else if (e_pol < e_neel) {
        out.energy = e_pol;
        out.label = PhaseLabel::PM_N;
    } else {
        out.energy = e_neel;
        out.label = PhaseLabel::AFM_N;
    }
    return out;
}

PhaseLabel classify_orders(const OrderParams& o, const ToleranceSet& t) {
    const double alpha = std::abs(o.photon_displacement);
    const double mx = std::abs(o.mx);
    const double tol = t.tol_order_param;

    // A finite coherent field needs a transverse polarization to source it.
    // The reverse is allowed: mean-field alpha = -2 g m_x / omega vanishes
    // for small g at finite m_x.
    if (alpha > 100.0 * tol && mx <= tol)
        throw ConsistencyError("contradictory superradiance indicators: |alpha|=" + std::to_string(alpha) +
                               " |mx|=" + std::to_string(mx));

    const bool superradiant = alpha > tol;
    const bool afm = std::abs(o.m_stag) > tol;
    if (afm) return superradiant ? PhaseLabel::AFM_S : PhaseLabel::AFM_N;
    return superradiant ? PhaseLabel::PM_S : PhaseLabel::PM_N;
}

}  // namespace phasekit
