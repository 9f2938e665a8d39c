#include "modest/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace modest {
namespace {

Mat diag_of(const BinVec& d) {
    Mat m = Mat::Zero(d.size(), d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) m(i, i) = d(i);
    return m;
}

Mat diag_complement(const BinVec& d) {
    Mat m = Mat::Zero(d.size(), d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) m(i, i) = 1.0 - d(i);
    return m;
}

Mat ag_matrix(const WidthModel& wm, const DiagTriple& d) {
    return diag_of(d.d1) * wm.A_g_dagger_abs * diag_complement(d.d2) * wm.A_g_abs +
           diag_complement(d.d1);
}

Mat afmu_matrix(const WidthModel& wm, const DiagTriple& d) {
    const Eigen::Index nz = wm.nz(), n = wm.n(), p = wm.p();
    Mat out(nz, nz);
    out.topRows(n) = wm.A_f_abs + 2.0 * diag_complement(d.d3) * wm.C_f_z;
    if (p > 0) {
        out.bottomRows(p).setZero();
        out.bottomLeftCorner(p, n) = wm.A_mu_abs;
    }
    return out;
}

Vec dg_vector(const WidthModel& wm, const DiagTriple& d) {
    return diag_of(d.d1) * wm.A_g_dagger_abs * diag_of(d.d2) *
           (wm.W_g_abs * wm.delta_v + wm.delta_e_g);
}

Vec dfh_vector(const WidthModel& wm, const DiagTriple& d) {
    const Eigen::Index nz = wm.nz(), n = wm.n(), p = wm.p();
    Vec out(nz);
    out.head(n) = (wm.W_f_abs + 2.0 * diag_complement(d.d3) * wm.C_f_w) * wm.delta_w +
                  wm.delta_e_f;
    if (p > 0)
        out.tail(p) = wm.delta_e_mu.size() == p ? wm.delta_e_mu : Vec::Zero(p);
    return out;
}

double two_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// Scaling-and-squaring Taylor exponential; matrices here are small.
Mat expm(Mat a) {
    int squarings = 0;
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5 && squarings < 40) {
        a *= 0.5;
        norm *= 0.5;
        ++squarings;
    }
    Mat result = Mat::Identity(a.rows(), a.cols());
    Mat term = result;
    for (int k = 1; k <= 24; ++k) {
        term = term * a / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

StabilityCertificate make_certificate(const WidthModel& wm, const DiagTriple& d,
                                      bool with_exp_limit = false) {
    StabilityCertificate cert;
    cert.D = d;
    const Mat ag = ag_matrix(wm, d);
    const Mat contraction = ag * afmu_matrix(wm, d);
    cert.contraction_norm = two_norm(contraction);
    cert.feasible = cert.contraction_norm <= 1.0;
    const Vec dbar = dg_vector(wm, d) + ag * dfh_vector(wm, d);
    if (cert.contraction_norm < 1.0) {
        const Eigen::Index nz = wm.nz();
        cert.limit_width =
            (Mat::Identity(nz, nz) - contraction).partialPivLu().solve(dbar);
        cert.limit_norm = cert.limit_width.norm();
    } else {
        cert.limit_norm = std::numeric_limits<double>::infinity();
    }
    if (with_exp_limit) cert.exp_limit_norm = (expm(contraction) * dbar).norm();
    return cert;
}

// total order: feasibility first, then limit norm, then contraction norm,
// then lexicographic bits for determinism
bool better(const StabilityCertificate& a, const StabilityCertificate& b) {
    if (a.feasible != b.feasible) return a.feasible;
    const auto key = [](const StabilityCertificate& c) {
        return c.contraction_norm < 1.0 ? c.limit_norm
                                        : std::numeric_limits<double>::infinity();
    };
    const double ka = key(a), kb = key(b);
    if (std::abs(ka - kb) > 1e-12 * (1.0 + std::min(ka, kb))) return ka < kb;
    if (std::abs(a.contraction_norm - b.contraction_norm) > 1e-14)
        return a.contraction_norm < b.contraction_norm;
    const auto bits = [](const DiagTriple& d) {
        std::vector<int> v;
        for (Eigen::Index i = 0; i < d.d1.size(); ++i) v.push_back(d.d1(i));
        for (Eigen::Index i = 0; i < d.d2.size(); ++i) v.push_back(d.d2(i));
        for (Eigen::Index i = 0; i < d.d3.size(); ++i) v.push_back(d.d3(i));
        return v;
    };
    return bits(a.D) < bits(b.D);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

bool in_admissible_set(const WidthModel& wm, const DiagTriple& d) {
    for (Eigen::Index i = 0; i < d.d1.size(); ++i)
        if (d.d1(i) != 0 && wm.r_mask(i) != 0) return false;
    return true;
}

Vec width_step(const WidthModel& wm, const DiagTriple& d, const Vec& delta_prev) {
    const Mat ag = ag_matrix(wm, d);
    Vec out = ag * afmu_matrix(wm, d) * delta_prev + dg_vector(wm, d) + ag * dfh_vector(wm, d);
    for (Eigen::Index i = 0; i < d.d1.size(); ++i)
        if (d.d1(i) != 0 && wm.r_mask(i) != 0)
            out(i) = std::numeric_limits<double>::infinity();  // 2 kappa D1 r term
    return out;
}

double contraction_norm(const WidthModel& wm, const DiagTriple& d) {
    return two_norm(ag_matrix(wm, d) * afmu_matrix(wm, d));
}

StabilityCertificate stability_search_exhaustive(const WidthModel& wm) {
    const Eigen::Index nz = wm.nz(), l = wm.l(), n = wm.n();

    std::vector<Eigen::Index> free_d1;  // masked bits are pinned to zero
    for (Eigen::Index i = 0; i < nz; ++i)
        if (wm.r_mask(i) == 0) free_d1.push_back(i);

    const int bits = static_cast<int>(free_d1.size()) + static_cast<int>(l) +
                     static_cast<int>(n);
    if (bits > 24)
        throw UnsupportedDimension("stability_search_exhaustive: more than 2^24 candidates");

    StabilityCertificate best;
    bool first = true;
    const std::uint64_t total = 1ULL << bits;
    for (std::uint64_t code = 0; code < total; ++code) {
        DiagTriple d;
        d.d1 = BinVec::Zero(nz);
        d.d2 = BinVec::Zero(l);
        d.d3 = BinVec::Zero(n);
        std::uint64_t c = code;
        for (const Eigen::Index i : free_d1) {
            d.d1(i) = static_cast<int>(c & 1);
            c >>= 1;
        }
        for (Eigen::Index i = 0; i < l; ++i) {
            d.d2(i) = static_cast<int>(c & 1);
            c >>= 1;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            d.d3(i) = static_cast<int>(c & 1);
            c >>= 1;
        }
        StabilityCertificate cand = make_certificate(wm, d);
        if (first || better(cand, best)) {
            best = std::move(cand);
            first = false;
        }
    }
    return make_certificate(wm, best.D, true);
}

StabilityCertificate stability_search_greedy(const WidthModel& wm, int restarts,
                                             std::uint64_t seed) {
    const Eigen::Index nz = wm.nz(), l = wm.l(), n = wm.n();
    std::vector<Eigen::Index> free_d1;
    for (Eigen::Index i = 0; i < nz; ++i)
        if (wm.r_mask(i) == 0) free_d1.push_back(i);

    const auto descend = [&](DiagTriple d) {
        StabilityCertificate current = make_certificate(wm, d);
        bool improved = true;
        while (improved) {
            improved = false;
            StabilityCertificate best_neighbor = current;
            // steepest single-bit flip
            for (std::size_t k = 0; k < free_d1.size() + static_cast<std::size_t>(l + n);
                 ++k) {
                DiagTriple nd = current.D;
                if (k < free_d1.size()) {
                    nd.d1(free_d1[k]) ^= 1;
                } else if (k < free_d1.size() + static_cast<std::size_t>(l)) {
                    nd.d2(static_cast<Eigen::Index>(k - free_d1.size())) ^= 1;
                } else {
                    nd.d3(static_cast<Eigen::Index>(k - free_d1.size() - l)) ^= 1;
                }
                StabilityCertificate cand = make_certificate(wm, nd);
                if (better(cand, best_neighbor)) best_neighbor = std::move(cand);
            }
            if (better(best_neighbor, current)) {
                current = std::move(best_neighbor);
                improved = true;
            }
        }
        return current;
    };

    const auto zero_triple = [&] {
        DiagTriple d;
        d.d1 = BinVec::Zero(nz);
        d.d2 = BinVec::Zero(l);
        d.d3 = BinVec::Zero(n);
        return d;
    };

    DiagTriple start = zero_triple();
    StabilityCertificate best = descend(start);

    DiagTriple ones = zero_triple();
    for (const Eigen::Index i : free_d1) ones.d1(i) = 1;
    ones.d2.setOnes();
    ones.d3.setOnes();
    StabilityCertificate cand = descend(ones);
    if (better(cand, best)) best = cand;

    std::uint64_t rng = seed;
    for (int r = 0; r < restarts; ++r) {
        DiagTriple d = zero_triple();
        for (const Eigen::Index i : free_d1) d.d1(i) = static_cast<int>(splitmix64(rng) & 1);
        for (Eigen::Index i = 0; i < l; ++i) d.d2(i) = static_cast<int>(splitmix64(rng) & 1);
        for (Eigen::Index i = 0; i < n; ++i) d.d3(i) = static_cast<int>(splitmix64(rng) & 1);
        cand = descend(d);
        if (better(cand, best)) best = cand;
    }
    return make_certificate(wm, best.D, true);
}

StabilityCertificate stability_search(const WidthModel& wm) {
    Eigen::Index free_bits = 0;
    for (Eigen::Index i = 0; i < wm.nz(); ++i)
        if (wm.r_mask(i) == 0) ++free_bits;
    const Eigen::Index bits = free_bits + wm.l() + wm.n();
    if (bits <= 24) return stability_search_exhaustive(wm);
    return stability_search_greedy(wm);
}

InstabilityCheck schur_instability_check(const IntervalMatrix& jb_f_x,
                                         const IntervalMatrix& jb_f_d,
                                         const IntervalMatrix& jb_mu) {
    if (jb_f_x.rows() != jb_f_x.cols() || jb_f_d.rows() != jb_f_x.rows() ||
        jb_f_d.cols() != jb_mu.rows() || jb_mu.cols() != jb_f_x.cols())
        throw DimensionError("schur_instability_check: inconsistent dimensions");

    const IntervalMatrix j_fmu = mul_interval_interval(jb_f_d, jb_mu);

    InstabilityCheck out;
    out.J_m = 0.5 * (jb_f_x.lo + jb_f_x.hi + j_fmu.lo + j_fmu.hi);
    const Eigen::EigenSolver<Mat> eig(out.J_m);
    for (Eigen::Index i = 0; i < out.J_m.rows(); ++i) {
        const std::complex<double> ev = eig.eigenvalues()(i);
        out.spectrum.push_back(ev);
        if (ev.real() < 0.0 || ev.real() > 1.0) out.unstable = true;
        if (std::abs(ev) > 1.0) out.spectral_radius_unstable = true;
    }
    return out;
}

DetectabilityReport detectability_report(const std::vector<ModeAnalysis>& modes) {
    DetectabilityReport rep;
    rep.per_mode = modes;
    for (const ModeAnalysis& m : modes) {
        if (!m.certificate.feasible) rep.unstable_observer_modes.push_back(m.mode_id);
        if (!m.instability.unstable) rep.stable_policy_modes.push_back(m.mode_id);
    }
    rep.detectable = rep.unstable_observer_modes.empty() && rep.stable_policy_modes.empty();
    return rep;
}

std::string DetectabilityReport::serialize() const {
    std::ostringstream out;
    out << "mode_detectable: " << (detectable ? "yes" : "no") << "\n";
    out << "modes_analyzed: " << per_mode.size() << "\n";
    for (const ModeAnalysis& m : per_mode) {
        out << "mode_" << m.mode_id
            << "_observer_stable: " << (m.certificate.feasible ? "yes" : "no") << "\n";
        out << "mode_" << m.mode_id << "_contraction_norm: " << m.certificate.contraction_norm
            << "\n";
        if (m.certificate.contraction_norm < 1.0) {
            out << "mode_" << m.mode_id << "_limit_width_norm: " << m.certificate.limit_norm
                << "\n";
            out << "mode_" << m.mode_id
                << "_exp_map_limit_norm: " << m.certificate.exp_limit_norm << "\n";
        }
        out << "mode_" << m.mode_id
            << "_policy_destabilizing: " << (m.instability.unstable ? "yes" : "no") << "\n";
        out << "mode_" << m.mode_id << "_policy_spectral_radius_unstable: "
            << (m.instability.spectral_radius_unstable ? "yes" : "no") << "\n";
    }
    if (!unstable_observer_modes.empty()) {
        out << "modes_without_stability_certificate:";
        for (int q : unstable_observer_modes) out << " " << q;
        out << "\n";
    }
    if (!stable_policy_modes.empty()) {
        out << "modes_failing_instability_check:";
        for (int q : stable_policy_modes) out << " " << q;
        out << "\n";
    }
    return out.str();
}

}  // namespace modest
