#ifndef RIGIDITY_SUBRES_HPP
#define RIGIDITY_SUBRES_HPP

#include <Eigen/Dense>
#include <map>
#include <vector>

namespace rigidity {

/// Narrow-band contraction spectrum: exponents chi_1 < ... < chi_l < 0 with a
/// band half-width eps and block dimensions.  `exact` marks spectra whose chi
/// are exactly representable (integer/dyadic), where type classification uses
/// no tolerance at all.
struct ChiSpectrum {
    std::vector<double> chi;
    double eps = 0.0;
    std::vector<int> dims;
    double type_tol = 1e-9;
    bool exact = false;

    ChiSpectrum() = default;
    ChiSpectrum(std::vector<double> chi_, std::vector<int> dims_, double eps_ = 0.0,
                bool exact_ = false);

    int blocks() const { return static_cast<int>(chi.size()); }
    int total_dim() const;
    int block_of_coord(int c) const;
    int coord_start(int block) const;
    double tol() const { return exact ? 0.0 : type_tol; }

    /// degree bound d(chi) = floor(chi_1/chi_l)
    int degree_bound() const;
    /// default admissible eps: a quarter of the smallest violation margin
    /// chi_i - sum s_j chi_j over non-sub-resonance types of degree <= d(chi)
    double eps0() const;
};

/// Homogeneity multi-degree s = (s_1, ..., s_l) of a term mapping into block i.
struct HomogeneousType {
    int block = 0;  // 0-based target block index
    std::vector<int> s;
    bool operator==(const HomogeneousType&) const = default;
};

/// chi_i <= sum_j s_j chi_j (up to the spectrum tolerance)
bool is_subresonance(const ChiSpectrum& spec, int block, const std::vector<int>& s);

/// All sub-resonance types into block i: s_j = 0 for j < i and
/// 1 <= sum s_j <= d(chi).
std::vector<HomogeneousType> enumerate_types(const ChiSpectrum& spec, int block);

/// Monomial exponents over the total_dim coordinates.
using Exponents = std::vector<int>;

int exponents_degree(const Exponents& e);
/// homogeneity type of a monomial under the block structure
std::vector<int> type_of_monomial(const ChiSpectrum& spec, const Exponents& e);

/// Polynomial map P: R^n -> R^n with P(0) = 0, one coefficient per monomial
/// per output coordinate, graded by the spectrum's block structure.
class GradedPolyMap {
public:
    explicit GradedPolyMap(ChiSpectrum spec);
    static GradedPolyMap identity(const ChiSpectrum& spec);
    static GradedPolyMap from_linear(const ChiSpectrum& spec, const Eigen::MatrixXd& A);

    const ChiSpectrum& spectrum() const { return spec_; }
    int dim() const { return n_; }

    void set_coeff(int coord, const Exponents& e, double c);
    void add_coeff(int coord, const Exponents& e, double c);
    double coeff(int coord, const Exponents& e) const;
    const std::map<Exponents, double>& component(int coord) const {
        return comp_[static_cast<size_t>(coord)];
    }

    Eigen::MatrixXd linear_part() const;
    int degree() const;
    Eigen::VectorXd eval(const Eigen::VectorXd& t) const;

    /// this(other(t)); terms above degree_cap dropped (cap < 0: no cap)
    GradedPolyMap compose_with(const GradedPolyMap& other, int degree_cap) const;
    /// terms of total degree m only
    GradedPolyMap homogeneous_part(int m) const;
    GradedPolyMap truncated(int degree_cap) const;
    GradedPolyMap operator+(const GradedPolyMap& o) const;
    GradedPolyMap operator-(const GradedPolyMap& o) const;

    /// sum of |coeff| over non-sub-resonance terms
    double nonsr_mass() const;
    /// drop |coeff| <= threshold
    void prune(double threshold = 0.0);

    bool all_subresonance(double coeff_floor) const;

private:
    ChiSpectrum spec_;
    int n_;
    std::vector<std::map<Exponents, double>> comp_;
};

/// Element of the sub-resonance group S: only sub-resonance terms, invertible
/// linear part, degree <= d(chi).
class SubresonancePolyMap {
public:
    /// Validates; throws ClosureViolationError if a non-sub-resonance term
    /// above coeff_floor is present, SingularLinearPartError if D_0 P singular.
    explicit SubresonancePolyMap(GradedPolyMap g, double coeff_floor = 1e-12);
    static SubresonancePolyMap identity(const ChiSpectrum& spec);

    const GradedPolyMap& poly() const { return g_; }
    const ChiSpectrum& spectrum() const { return g_.spectrum(); }
    Eigen::VectorXd eval(const Eigen::VectorXd& t) const { return g_.eval(t); }

private:
    GradedPolyMap g_;
};

/// Exact symbolic composition in S; every resulting term must be
/// sub-resonance (closure-violation above 1e-12 otherwise).
SubresonancePolyMap compose(const SubresonancePolyMap& P, const SubresonancePolyMap& Q);

/// Group inverse: compose(P, invert(P)) = identity as polynomial maps.
SubresonancePolyMap invert(const SubresonancePolyMap& P);

double nonsr_mass(const GradedPolyMap& G);

struct PolyFit {
    GradedPolyMap map;
    double rms_residual;
    double condition_number;
};

/// Least-squares polynomial through the origin of the given total degree.
/// Throws IllConditionedFitError when the design matrix is rank deficient.
PolyFit fit_poly_map(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& samples,
                     int degree, const ChiSpectrum& spec);

} // namespace rigidity

#endif
