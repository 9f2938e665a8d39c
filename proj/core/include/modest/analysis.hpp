#pragma once

#include <complex>
#include <string>
#include <vector>

#include "modest/interval.hpp"

namespace modest {

// Ingredients of the interval-width comparison system
//   delta_k <= Ag(D1,D2) Afmu(D3) delta_{k-1} + Dg(D1,D2) + Ag(D1,D2) Dfh(D3)
// with  Ag(D1,D2)  = D1 |Ag+| (I-D2) |Ag| + (I-D1)
//       Afmu(D3)   = [ |Af| + 2(I-D3) Cfz ; |Amu| 0 ]
//       Dg(D1,D2)  = D1 |Ag+| D2 (|Wg| dv + de_g)
//       Dfh(D3)    = [ (|Wf| + 2(I-D3) Cfw) dw + de_f ; de_mu ]
// All slope fields are magnitudes (elementwise nonnegative).
struct WidthModel {
    Mat A_g_abs;         // l x (n+p)
    Mat A_g_dagger_abs;  // (n+p) x l
    Mat W_g_abs;         // l x n_v
    Mat A_f_abs;         // n x (n+p)
    Mat W_f_abs;         // n x n_w
    Mat A_mu_abs;        // p x n
    Mat C_f_z;           // n x (n+p)
    Mat C_f_w;           // n x n_w
    Vec delta_e_f;       // n
    Vec delta_e_g;       // l
    Vec delta_e_mu;      // p (zero when the policy abstraction is exact)
    Vec delta_w;         // n_w
    Vec delta_v;         // n_v
    BinVec r_mask;       // rowsupp(I - Ag+ Ag), length n+p

    Eigen::Index nz() const { return A_g_abs.cols(); }   // n + p
    Eigen::Index n() const { return A_f_abs.rows(); }
    Eigen::Index p() const { return nz() - n(); }
    Eigen::Index l() const { return A_g_abs.rows(); }
};

struct DiagTriple {
    BinVec d1, d2, d3;
};

bool in_admissible_set(const WidthModel& wm, const DiagTriple& d);

// One application of the width comparison system. Rows where D1 violates the
// admissible set get +infinity (the kappa term).
Vec width_step(const WidthModel& wm, const DiagTriple& d, const Vec& delta_prev);

// Induced 2-norm of the contraction factor Ag(D1,D2) Afmu(D3).
double contraction_norm(const WidthModel& wm, const DiagTriple& d);

struct StabilityCertificate {
    DiagTriple D;
    double contraction_norm = 0.0;
    bool feasible = false;  // contraction_norm <= 1
    Vec limit_width;        // (I - Abar)^{-1} Dbar when contraction_norm < 1
    double limit_norm = 0.0;
    double exp_limit_norm = 0.0;  // ||exp(Abar) Dbar||, reported for comparison
};

// Minimizes ||limit_width|| over admissible triples subject to contraction
// norm < 1; if nothing contracts, returns the norm-minimizing triple with
// feasible = false. Exhaustive for small bit counts, greedy beyond.
StabilityCertificate stability_search(const WidthModel& wm);
StabilityCertificate stability_search_exhaustive(const WidthModel& wm);
StabilityCertificate stability_search_greedy(const WidthModel& wm, int restarts = 10,
                                             std::uint64_t seed = 0x5eed);

struct InstabilityCheck {
    bool unstable = false;                 // some Re(eig) strictly outside [0, 1]
    bool spectral_radius_unstable = false; // max |eig| > 1
    Mat J_m;
    std::vector<std::complex<double>> spectrum;
};

// Midpoint-Jacobian instability test for the closed policy loop: the d-column
// Jacobian interval is composed with the policy Jacobian interval first.
InstabilityCheck schur_instability_check(const IntervalMatrix& jb_f_x,
                                         const IntervalMatrix& jb_f_d,
                                         const IntervalMatrix& jb_mu);

struct ModeAnalysis {
    int mode_id = 0;
    StabilityCertificate certificate;
    InstabilityCheck instability;
};

struct DetectabilityReport {
    bool detectable = false;
    std::vector<int> unstable_observer_modes;   // no stability certificate
    std::vector<int> stable_policy_modes;       // instability check failed
    std::vector<ModeAnalysis> per_mode;

    std::string serialize() const;  // key: value lines
};

DetectabilityReport detectability_report(const std::vector<ModeAnalysis>& modes);

}  // namespace modest
