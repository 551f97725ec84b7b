// fock.hpp — truncated photon-number bases tensored with dopant level spaces,
// plus the elementary mode and dopant operators over them.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowsim {

inline constexpr double kPi = std::numbers::pi;

using Complex = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<Complex>;
using VectorC = Eigen::VectorXcd;
using MatrixC = Eigen::MatrixXcd;

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace detail

/// Electronic levels of a dopant, ordered as a cascade g -> h -> e.
enum class Level : int { g = 0, h = 1, e = 2 };

inline char level_label(Level l) {
    switch (l) {
        case Level::g: return 'g';
        case Level::h: return 'h';
        case Level::e: return 'e';
    }
    return '?';
}

inline Level level_from_label(char c) {
    switch (c) {
        case 'g': return Level::g;
        case 'h': return Level::h;
        case 'e': return Level::e;
        default: throw std::invalid_argument(std::string("unknown level label '") + c + "'");
    }
}

/// The defect modes of a device: how many, and the global photon-number cap.
struct ModeSet {
    int mode_count = 1;
    int n_max_total = 0;

    ModeSet() = default;
    ModeSet(int modes, int n_max) : mode_count(modes), n_max_total(n_max) {
        detail::require(mode_count >= 1, "ModeSet: mode_count must be >= 1");
        detail::require(n_max_total >= 0, "ModeSet: n_max_total must be >= 0");
    }
};

/// Ordered subset of {g, h, e} with the cascade order fixed.
class DopantLevelSet {
public:
    explicit DopantLevelSet(std::vector<Level> levels) : levels_(std::move(levels)) {
        detail::require(levels_.size() == 2 || levels_.size() == 3,
                        "DopantLevelSet: need 2 or 3 levels");
        for (std::size_t i = 1; i < levels_.size(); ++i)
            detail::require(static_cast<int>(levels_[i]) > static_cast<int>(levels_[i - 1]),
                            "DopantLevelSet: levels must be unique and ordered g,h,e");
    }

    static DopantLevelSet two_level() { return DopantLevelSet({Level::g, Level::e}); }
    static DopantLevelSet cascade() { return DopantLevelSet({Level::g, Level::h, Level::e}); }

    int size() const { return static_cast<int>(levels_.size()); }
    Level level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
    bool is_cascade() const { return levels_.size() == 3; }

    bool contains(Level l) const {
        return std::find(levels_.begin(), levels_.end(), l) != levels_.end();
    }
    /// Position of a level within this set; throws if absent.
    int position(Level l) const {
        auto it = std::find(levels_.begin(), levels_.end(), l);
        detail::require(it != levels_.end(),
                        std::string("level '") + level_label(l) + "' not present in dopant level set");
        return static_cast<int>(it - levels_.begin());
    }

    bool operator==(const DopantLevelSet& o) const { return levels_ == o.levels_; }

private:
    std::vector<Level> levels_;
};

/// One basis state: photon occupations per mode and one level per dopant.
struct BasisState {
    std::vector<int> occupations;
    std::vector<Level> levels;

    int total_photons() const {
        int n = 0;
        for (int v : occupations) n += v;
        return n;
    }
    /// Quanta held by the dopants, counting h as 1 and e as 2 (cascade bookkeeping).
    int dopant_quanta() const {
        int q = 0;
        for (Level l : levels) q += static_cast<int>(l);
        return q;
    }
};

inline bool state_less(const BasisState& a, const BasisState& b) {
    const int ta = a.total_photons(), tb = b.total_photons();
    if (ta != tb) return ta < tb;
    if (a.occupations != b.occupations) return a.occupations < b.occupations;
    return a.levels < b.levels;
}

struct BasisOptions {
    /// Hard cap on the enumerated dimension.
    std::int64_t max_dimension = 1'000'000;
    /// When set, cap total photons + dopant quanta (h=1, e=2) at n_max_total
    /// instead of photons alone. Off by default: the plain tensor product.
    bool combined_excitation_cap = false;
};

/// Enumerated tensor basis of photon occupations x dopant levels.
///
/// Ordering is lexicographic by (total photons, occupation vector, dopant
/// tuple) and reproducible across runs. Immutable after construction.
class HybridBasis {
public:
    static std::shared_ptr<const HybridBasis> create(const ModeSet& modes,
                                                     std::vector<DopantLevelSet> dopants,
                                                     const BasisOptions& opts = {}) {
        return std::shared_ptr<const HybridBasis>(new HybridBasis(modes, std::move(dopants), opts));
    }

    const ModeSet& modes() const { return modes_; }
    int mode_count() const { return modes_.mode_count; }
    int n_max_total() const { return modes_.n_max_total; }
    int dopant_count() const { return static_cast<int>(dopants_.size()); }
    const DopantLevelSet& dopant(int i) const { return dopants_.at(static_cast<std::size_t>(i)); }
    bool combined_excitation_cap() const { return opts_.combined_excitation_cap; }

    int dimension() const { return static_cast<int>(states_.size()); }
    const BasisState& state(int k) const { return states_.at(static_cast<std::size_t>(k)); }
    const std::vector<BasisState>& states() const { return states_; }

    /// Index of a state, or -1 if it lies outside the truncated basis.
    int index_of(const BasisState& s) const {
        auto it = std::lower_bound(states_.begin(), states_.end(), s, state_less);
        if (it == states_.end() || it->occupations != s.occupations || it->levels != s.levels)
            return -1;
        return static_cast<int>(it - states_.begin());
    }

    int index_of(const std::vector<int>& occupations, const std::vector<Level>& levels = {}) const {
        BasisState s{occupations, levels};
        if (levels.empty() && dopant_count() > 0) {
            s.levels.assign(static_cast<std::size_t>(dopant_count()), Level::g);
        }
        return index_of(s);
    }

    /// Structural equality; used as the fallback basis-compatibility check.
    bool same_structure(const HybridBasis& o) const {
        if (modes_.mode_count != o.modes_.mode_count) return false;
        if (modes_.n_max_total != o.modes_.n_max_total) return false;
        if (opts_.combined_excitation_cap != o.opts_.combined_excitation_cap) return false;
        if (dopants_.size() != o.dopants_.size()) return false;
        for (std::size_t i = 0; i < dopants_.size(); ++i)
            if (!(dopants_[i] == o.dopants_[i])) return false;
        return true;
    }

    std::string state_string(int k) const {
        const BasisState& s = state(k);
        std::string out = "|";
        for (std::size_t i = 0; i < s.occupations.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(s.occupations[i]);
        }
        if (!s.levels.empty()) {
            out += ";";
            for (Level l : s.levels) out += level_label(l);
        }
        out += ">";
        return out;
    }

private:
    HybridBasis(const ModeSet& modes, std::vector<DopantLevelSet> dopants, const BasisOptions& opts)
        : modes_(modes), dopants_(std::move(dopants)), opts_(opts) {
        enumerate();
    }

    void enumerate() {
        const int m = modes_.mode_count;
        const int cap = modes_.n_max_total;
        std::vector<int> occ(static_cast<std::size_t>(m), 0);
        // Occupation vectors by ascending total, lexicographic within a total;
        // dopant tuples vary fastest.
        for (int total = 0; total <= cap; ++total) {
            emit_occupations(occ, 0, total);
        }
    }

    void emit_occupations(std::vector<int>& occ, int mode, int remaining) {
        const int m = modes_.mode_count;
        if (mode == m - 1) {
            occ[static_cast<std::size_t>(mode)] = remaining;
            emit_dopant_tuples(occ);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            occ[static_cast<std::size_t>(mode)] = v;
            emit_occupations(occ, mode + 1, remaining - v);
        }
    }

    void emit_dopant_tuples(const std::vector<int>& occ) {
        std::vector<Level> levels(dopants_.size(), Level::g);
        emit_levels(occ, levels, 0);
    }

    void emit_levels(const std::vector<int>& occ, std::vector<Level>& levels, std::size_t d) {
        if (d == dopants_.size()) {
            BasisState s{occ, levels};
            if (opts_.combined_excitation_cap &&
                s.total_photons() + s.dopant_quanta() > modes_.n_max_total)
                return;
            if (static_cast<std::int64_t>(states_.size()) >= opts_.max_dimension)
                throw std::length_error("HybridBasis: dimension exceeds configured cap of " +
                                        std::to_string(opts_.max_dimension) + " states");
            states_.push_back(std::move(s));
            return;
        }
        for (int i = 0; i < dopants_[d].size(); ++i) {
            levels[d] = dopants_[d].level(i);
            emit_levels(occ, levels, d + 1);
        }
    }

    ModeSet modes_;
    std::vector<DopantLevelSet> dopants_;
    BasisOptions opts_;
    std::vector<BasisState> states_;
};

using BasisPtr = std::shared_ptr<const HybridBasis>;

inline BasisPtr enumerate_basis(const ModeSet& modes, std::vector<DopantLevelSet> dopants = {},
                                const BasisOptions& opts = {}) {
    return HybridBasis::create(modes, std::move(dopants), opts);
}

inline bool compatible(const BasisPtr& a, const BasisPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->same_structure(*b);
}

/// Complex amplitude vector over a HybridBasis.
struct StateVector {
    BasisPtr basis;
    VectorC amplitudes;

    StateVector() = default;
    StateVector(BasisPtr b, VectorC a) : basis(std::move(b)), amplitudes(std::move(a)) {
        detail::require(basis && amplitudes.size() == basis->dimension(),
                        "StateVector: amplitude length must equal basis dimension");
    }

    static StateVector zero(const BasisPtr& b) {
        return StateVector(b, VectorC::Zero(b->dimension()));
    }
    static StateVector basis_state(const BasisPtr& b, int index) {
        detail::require(index >= 0 && index < b->dimension(), "StateVector: basis index out of range");
        VectorC v = VectorC::Zero(b->dimension());
        v(index) = 1.0;
        return StateVector(b, std::move(v));
    }

    double squared_norm() const { return amplitudes.squaredNorm(); }
    double norm() const { return amplitudes.norm(); }

    Complex overlap(const StateVector& other) const {
        detail::require(compatible(basis, other.basis), "StateVector: basis mismatch in overlap");
        return amplitudes.dot(other.amplitudes);  // conjugates *this
    }

    void normalize() {
        const double n = norm();
        detail::require(n > 0.0, "StateVector: cannot normalize the zero vector");
        amplitudes /= n;
    }
};

/// Sparse complex matrix over a HybridBasis with Hermiticity metadata.
struct OperatorMatrix {
    BasisPtr basis;
    SparseMatrixC entries;
    bool hermitian = false;

    OperatorMatrix() = default;
    OperatorMatrix(BasisPtr b, SparseMatrixC m, bool herm = false)
        : basis(std::move(b)), entries(std::move(m)), hermitian(herm) {
        detail::require(basis && entries.rows() == basis->dimension() &&
                            entries.cols() == basis->dimension(),
                        "OperatorMatrix: matrix shape must match basis dimension");
    }

    int dimension() const { return basis ? basis->dimension() : 0; }

    StateVector apply(const StateVector& psi) const {
        detail::require(compatible(basis, psi.basis), "OperatorMatrix: basis mismatch in apply");
        return StateVector(psi.basis, entries * psi.amplitudes);
    }

    OperatorMatrix adjoint() const {
        return OperatorMatrix(basis, SparseMatrixC(entries.adjoint()), hermitian);
    }

    MatrixC dense() const { return MatrixC(entries); }

    /// Largest entry of |M - M^dagger|.
    double hermiticity_defect() const {
        SparseMatrixC d = entries - SparseMatrixC(entries.adjoint());
        double m = 0.0;
        for (int k = 0; k < d.outerSize(); ++k)
            for (SparseMatrixC::InnerIterator it(d, k); it; ++it)
                m = std::max(m, std::abs(it.value()));
        return m;
    }

    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }
};

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    detail::require(compatible(a.basis, b.basis), "OperatorMatrix: basis mismatch in +");
    return OperatorMatrix(a.basis, a.entries + b.entries, a.hermitian && b.hermitian);
}

inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    detail::require(compatible(a.basis, b.basis), "OperatorMatrix: basis mismatch in -");
    return OperatorMatrix(a.basis, a.entries - b.entries, a.hermitian && b.hermitian);
}

inline OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    detail::require(compatible(a.basis, b.basis), "OperatorMatrix: basis mismatch in *");
    return OperatorMatrix(a.basis, SparseMatrixC(a.entries * b.entries), false);
}

inline OperatorMatrix operator*(double s, const OperatorMatrix& a) {
    return OperatorMatrix(a.basis, SparseMatrixC(s * a.entries), a.hermitian);
}

inline OperatorMatrix operator*(Complex s, const OperatorMatrix& a) {
    const bool herm = a.hermitian && s.imag() == 0.0;
    return OperatorMatrix(a.basis, SparseMatrixC(s * a.entries), herm);
}

/// Commutator [A, B].
inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b - b * a;
}

inline double max_abs_entry(const SparseMatrixC& m) {
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

inline OperatorMatrix identity_op(const BasisPtr& basis) {
    SparseMatrixC m(basis->dimension(), basis->dimension());
    m.setIdentity();
    return OperatorMatrix(basis, std::move(m), true);
}

inline OperatorMatrix zero_op(const BasisPtr& basis) {
    return OperatorMatrix(basis, SparseMatrixC(basis->dimension(), basis->dimension()), true);
}

/// Annihilation operator on one mode: a|..n..> = sqrt(n)|..n-1..>, identity on
/// dopants. Its adjoint is the creation operator within the truncated space.
inline OperatorMatrix annihilation_op(const BasisPtr& basis, int mode_index) {
    detail::require(mode_index >= 0 && mode_index < basis->mode_count(),
                    "annihilation_op: invalid mode index");
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int k = 0; k < basis->dimension(); ++k) {
        const BasisState& s = basis->state(k);
        const int n = s.occupations[static_cast<std::size_t>(mode_index)];
        if (n == 0) continue;
        BasisState t = s;
        t.occupations[static_cast<std::size_t>(mode_index)] = n - 1;
        const int j = basis->index_of(t);
        if (j >= 0) trips.emplace_back(j, k, std::sqrt(static_cast<double>(n)));
    }
    SparseMatrixC m(basis->dimension(), basis->dimension());
    m.setFromTriplets(trips.begin(), trips.end());
    return OperatorMatrix(basis, std::move(m), false);
}

inline OperatorMatrix creation_op(const BasisPtr& basis, int mode_index) {
    return annihilation_op(basis, mode_index).adjoint();
}

/// Occupation-number operator on one mode.
inline OperatorMatrix number_op(const BasisPtr& basis, int mode_index) {
    detail::require(mode_index >= 0 && mode_index < basis->mode_count(),
                    "number_op: invalid mode index");
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int k = 0; k < basis->dimension(); ++k) {
        const int n = basis->state(k).occupations[static_cast<std::size_t>(mode_index)];
        if (n > 0) trips.emplace_back(k, k, static_cast<double>(n));
    }
    SparseMatrixC m(basis->dimension(), basis->dimension());
    m.setFromTriplets(trips.begin(), trips.end());
    return OperatorMatrix(basis, std::move(m), true);
}

inline OperatorMatrix total_number_op(const BasisPtr& basis) {
    OperatorMatrix total = zero_op(basis);
    for (int i = 0; i < basis->mode_count(); ++i) total = total + number_op(basis, i);
    total.hermitian = true;
    return total;
}

/// sigma_ij = |i><j| on the chosen dopant, identity elsewhere. States pushed
/// outside a combined-excitation cap are truncated.
inline OperatorMatrix dopant_transition_op(const BasisPtr& basis, int dopant_index, Level i,
                                           Level j) {
    detail::require(dopant_index >= 0 && dopant_index < basis->dopant_count(),
                    "dopant_transition_op: invalid dopant index");
    const DopantLevelSet& set = basis->dopant(dopant_index);
    set.position(i);  // validates presence
    set.position(j);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int k = 0; k < basis->dimension(); ++k) {
        const BasisState& s = basis->state(k);
        if (s.levels[static_cast<std::size_t>(dopant_index)] != j) continue;
        BasisState t = s;
        t.levels[static_cast<std::size_t>(dopant_index)] = i;
        const int idx = basis->index_of(t);
        if (idx >= 0) trips.emplace_back(idx, k, 1.0);
    }
    SparseMatrixC m(basis->dimension(), basis->dimension());
    m.setFromTriplets(trips.begin(), trips.end());
    return OperatorMatrix(basis, std::move(m), i == j);
}

/// Total excitation number: photons + 1*sigma_hh + 2*sigma_ee summed over dopants.
inline OperatorMatrix total_excitation_op(const BasisPtr& basis) {
    OperatorMatrix total = total_number_op(basis);
    for (int d = 0; d < basis->dopant_count(); ++d) {
        const DopantLevelSet& set = basis->dopant(d);
        if (set.contains(Level::h))
            total = total + dopant_transition_op(basis, d, Level::h, Level::h);
        if (set.contains(Level::e))
            total = total + 2.0 * dopant_transition_op(basis, d, Level::e, Level::e);
    }
    total.hermitian = true;
    return total;
}

}  // namespace crowsim
