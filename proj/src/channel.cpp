#include "defectlab/channel.hpp"

#include "defectlab/rng.hpp"

#include <cmath>
#include <sstream>

namespace defectlab {

namespace {

Matrix basis_op(int dim, int i, int j) {
    Matrix m = Matrix::Zero(dim, dim);
    m(i, j) = 1.0;
    return m;
}

void check_map(const KrausMap& t) {
    if (t.dim <= 0) throw InvalidDescriptor("KrausMap: dimension must be positive");
    if (t.kraus.empty()) throw InvalidDescriptor("KrausMap: empty Kraus family");
    for (const Matrix& v : t.kraus)
        if (v.rows() != t.dim || v.cols() != t.dim)
            throw DimMismatch("KrausMap: Kraus operator dimension mismatch");
}

// Family rescale forcing strict subunitality with a 5% margin.
void rescale_family(std::vector<Matrix>& kraus, double margin = 0.05) {
    Matrix m = Matrix::Zero(kraus.front().rows(), kraus.front().cols());
    for (const Matrix& v : kraus) m += v.adjoint() * v;
    const double top = max_eigenvalue(m);
    if (top <= 0) return;
    const double scale = 1.0 / std::sqrt(top * (1.0 + margin));
    for (Matrix& v : kraus) v *= scale;
}

}  // namespace

Matrix apply_map(const KrausMap& t, const Matrix& x) {
    check_map(t);
    if (x.rows() != t.dim || x.cols() != t.dim)
        throw DimMismatch("apply_map: input dimension mismatch");
    Matrix out = Matrix::Zero(t.dim, t.dim);
    for (const Matrix& v : t.kraus) out += v.adjoint() * x * v;
    return hermitize(out);
}

Matrix apply_power(const KrausMap& t, Matrix x, int k) {
    for (int i = 0; i < k; ++i) x = apply_map(t, x);
    return x;
}

bool is_subunital(const KrausMap& t, double psd_tol) {
    const Matrix ti = apply_map(t, Matrix::Identity(t.dim, t.dim));
    return psd_leq(ti, Matrix::Identity(t.dim, t.dim), psd_tol);
}

DefectData defect(const KrausMap& t, double psd_tol) {
    const Matrix id = Matrix::Identity(t.dim, t.dim);
    const Matrix ti = apply_map(t, id);
    if (!psd_leq(ti, id, psd_tol)) throw NotSubunital("defect: T(I) <= I fails");
    DefectData d;
    d.defect = hermitize(id - ti);
    d.success = id - d.defect;
    return d;
}

KrausMap compose(const KrausMap& t, const KrausMap& s) {
    check_map(t);
    check_map(s);
    if (t.dim != s.dim) throw DimMismatch("compose: dimension mismatch");
    const std::size_t count = t.kraus.size() * s.kraus.size();
    if (count > 4096)
        throw std::runtime_error("compose: Kraus family would exceed 4096 operators");
    KrausMap out;
    out.dim = t.dim;
    out.kraus.reserve(count);
    for (const Matrix& w : s.kraus)
        for (const Matrix& v : t.kraus) out.kraus.push_back(w * v);
    out.label = t.label.empty() && s.label.empty() ? "" : t.label + "∘" + s.label;
    return out;
}

KrausMap tensor_map(const KrausMap& t, const KrausMap& s) {
    check_map(t);
    check_map(s);
    KrausMap out;
    out.dim = t.dim * s.dim;
    out.kraus.reserve(t.kraus.size() * s.kraus.size());
    for (const Matrix& v : t.kraus)
        for (const Matrix& w : s.kraus) out.kraus.push_back(tensor(v, w));
    out.label = t.label.empty() && s.label.empty() ? "" : t.label + "⊗" + s.label;
    return out;
}

KrausMap identity_channel(int dim) {
    if (dim <= 0) throw InvalidDescriptor("identity_channel: dim must be positive");
    KrausMap t;
    t.dim = dim;
    t.kraus.push_back(Matrix::Identity(dim, dim));
    t.label = "identity:" + std::to_string(dim);
    return t;
}

KrausMap shift_channel(int d) {
    if (d < 2) throw InvalidDescriptor("shift_channel: dim must be >= 2");
    KrausMap t;
    t.dim = d;
    for (int i = 0; i + 1 < d; ++i) t.kraus.push_back(basis_op(d, i, i + 1));
    t.label = "shift:" + std::to_string(d);
    return t;
}

KrausMap dephasing_decay(double c) {
    if (!(c > 0.0 && c < 1.0))
        throw InvalidDescriptor("dephasing_decay: c must lie in (0,1)");
    KrausMap t;
    t.dim = 2;
    t.kraus.push_back(basis_op(2, 0, 0));
    t.kraus.push_back(std::sqrt(c) * basis_op(2, 1, 1));
    std::ostringstream label;
    label << "dephasing:" << c;
    t.label = label.str();
    return t;
}

KrausMap povm_instrument(const std::vector<Matrix>& effects, double psd_tol) {
    if (effects.empty()) throw InvalidDescriptor("povm_instrument: no effects");
    const int dim = static_cast<int>(effects.front().rows());
    Matrix sum = Matrix::Zero(dim, dim);
    for (const Matrix& e : effects) {
        if (e.rows() != dim || e.cols() != dim)
            throw InvalidDescriptor("povm_instrument: effect dimension mismatch");
        if (!is_hermitian(e)) throw InvalidDescriptor("povm_instrument: effect not Hermitian");
        if (min_eigenvalue(e) < -psd_tol)
            throw InvalidDescriptor("povm_instrument: effect not PSD");
        sum += e;
    }
    if (!psd_leq(sum, Matrix::Identity(dim, dim), psd_tol))
        throw InvalidDescriptor("povm_instrument: effects sum exceeds identity");
    KrausMap t;
    t.dim = dim;
    for (const Matrix& e : effects) t.kraus.push_back(hermitian_sqrt(e, psd_tol));
    t.label = "povm";
    return t;
}

KrausMap qubit_noncommuting_povm() {
    Matrix e1 = Matrix::Zero(2, 2);
    e1(0, 0) = 0.5;
    Matrix plus = Matrix::Zero(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    const Matrix e2 = (2.0 / 3.0) * plus;
    KrausMap t = povm_instrument({e1, e2});
    t.label = "qubitpovm";
    return t;
}

KrausMap random_flag_nilpotent(int dim, std::uint64_t seed) {
    if (dim < 1) throw InvalidDescriptor("random_flag_nilpotent: dim must be >= 1");
    Rng rng(seed);
    const int s = rng.uniform_int(1, dim);
    const int n_ops = rng.uniform_int(1, 3);

    std::vector<Matrix> lowering;
    for (int k = 0; k < n_ops; ++k) {
        Matrix l = Matrix::Zero(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = i + 1; j < s; ++j) l(i, j) = rng.cgauss();
        lowering.push_back(l);
    }
    // Guarantee a nonzero family even at s = 1 (zero Kraus operator is fine).
    if (s == 1) lowering.assign(1, Matrix::Zero(1, 1));
    rescale_family(lowering);

    std::vector<Matrix> kraus;
    for (const Matrix& l : lowering) {
        Matrix v = Matrix::Zero(dim, dim);
        v.topLeftCorner(s, s) = l;
        kraus.push_back(v);
    }
    if (s < dim) {
        Matrix w = Matrix::Zero(dim, dim);
        w.bottomRightCorner(dim - s, dim - s) = rng.random_unitary(dim - s);
        kraus.push_back(w);
    }
    const Matrix g = rng.random_unitary(dim);
    KrausMap t;
    t.dim = dim;
    for (const Matrix& v : kraus) t.kraus.push_back(g.adjoint() * v * g);
    t.label = "randflag:" + std::to_string(dim) + ",seed=" + std::to_string(seed);
    return t;
}

KrausMap random_subunital(int dim, std::uint64_t seed, int n_kraus) {
    if (dim < 1) throw InvalidDescriptor("random_subunital: dim must be >= 1");
    Rng rng(seed);
    if (n_kraus <= 0) n_kraus = rng.uniform_int(2, 4);
    std::vector<Matrix> kraus;
    for (int k = 0; k < n_kraus; ++k) kraus.push_back(rng.gaussian_matrix(dim, dim));
    rescale_family(kraus);
    KrausMap t;
    t.dim = dim;
    t.kraus = std::move(kraus);
    t.label = "randsub:" + std::to_string(dim) + ",seed=" + std::to_string(seed);
    return t;
}

KrausMap random_commuting_instrument(int dim, std::uint64_t seed) {
    if (dim < 1) throw InvalidDescriptor("random_commuting_instrument: dim must be >= 1");
    Rng rng(seed);
    const Matrix u = rng.random_unitary(dim);
    const int n_eff = rng.uniform_int(2, 3);

    // Per-coordinate total sums: some exactly 1 (lossless), at least one lossy.
    std::vector<double> total(dim);
    for (int x = 0; x < dim; ++x)
        total[x] = (rng.uniform() < 0.4) ? 1.0 : rng.uniform(0.3, 0.9);
    total[rng.uniform_int(0, dim - 1)] = rng.uniform(0.3, 0.9);

    std::vector<Matrix> effects(n_eff, Matrix::Zero(dim, dim));
    for (int x = 0; x < dim; ++x) {
        std::vector<double> split(n_eff);
        double norm = 0.0;
        for (int a = 0; a < n_eff; ++a) {
            split[a] = rng.uniform(0.05, 1.0);
            norm += split[a];
        }
        for (int a = 0; a < n_eff; ++a)
            effects[a] += (total[x] * split[a] / norm) * u.col(x) * u.col(x).adjoint();
    }
    for (Matrix& e : effects) e = hermitize(e);
    KrausMap t = povm_instrument(effects);
    t.label = "commuting:" + std::to_string(dim) + ",seed=" + std::to_string(seed);
    return t;
}

KrausMap random_unital(int dim, std::uint64_t seed, int n_kraus) {
    if (dim < 1) throw InvalidDescriptor("random_unital: dim must be >= 1");
    Rng rng(seed);
    if (n_kraus <= 0) n_kraus = rng.uniform_int(2, 4);
    std::vector<Matrix> kraus;
    Matrix m = Matrix::Zero(dim, dim);
    for (int k = 0; k < n_kraus; ++k) {
        kraus.push_back(rng.gaussian_matrix(dim, dim));
        m += kraus.back().adjoint() * kraus.back();
    }
    // W_i = V_i M^{-1/2} gives Σ W_i† W_i = I.
    const EigH eig = eig_hermitian(m);
    Matrix inv_sqrt = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k)
        inv_sqrt += (1.0 / std::sqrt(eig.values(k))) * eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    KrausMap t;
    t.dim = dim;
    for (const Matrix& v : kraus) t.kraus.push_back(v * inv_sqrt);
    t.label = "randunital:" + std::to_string(dim) + ",seed=" + std::to_string(seed);
    return t;
}

namespace {

struct Descriptor {
    std::string name;
    std::vector<std::string> params;
    std::optional<std::uint64_t> seed;
};

Descriptor parse_descriptor(const std::string& text) {
    Descriptor d;
    const auto colon = text.find(':');
    d.name = text.substr(0, colon);
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.rfind("seed=", 0) == 0) {
                try {
                    d.seed = std::stoull(item.substr(5));
                } catch (const std::exception&) {
                    throw InvalidDescriptor("generate: bad seed in descriptor '" + text + "'");
                }
            } else {
                d.params.push_back(item);
            }
        }
    }
    return d;
}

int param_int(const Descriptor& d, std::size_t idx, const std::string& what) {
    if (idx >= d.params.size())
        throw InvalidDescriptor("generate: missing parameter for " + what);
    try {
        return std::stoi(d.params[idx]);
    } catch (const std::exception&) {
        throw InvalidDescriptor("generate: bad integer parameter for " + what);
    }
}

double param_double(const Descriptor& d, std::size_t idx, const std::string& what) {
    if (idx >= d.params.size())
        throw InvalidDescriptor("generate: missing parameter for " + what);
    try {
        return std::stod(d.params[idx]);
    } catch (const std::exception&) {
        throw InvalidDescriptor("generate: bad real parameter for " + what);
    }
}

}  // namespace

KrausMap generate(const std::string& descriptor, std::uint64_t default_seed) {
    const Descriptor d = parse_descriptor(descriptor);
    const std::uint64_t seed = d.seed.value_or(default_seed);
    if (d.name == "shift") return shift_channel(param_int(d, 0, "shift"));
    if (d.name == "dephasing") return dephasing_decay(param_double(d, 0, "dephasing"));
    if (d.name == "qubitpovm") return qubit_noncommuting_povm();
    if (d.name == "randflag") return random_flag_nilpotent(param_int(d, 0, "randflag"), seed);
    if (d.name == "randsub") return random_subunital(param_int(d, 0, "randsub"), seed);
    if (d.name == "commuting") return random_commuting_instrument(param_int(d, 0, "commuting"), seed);
    if (d.name == "randunital") return random_unital(param_int(d, 0, "randunital"), seed);
    if (d.name == "identity") return identity_channel(param_int(d, 0, "identity"));
    throw InvalidDescriptor("generate: unknown descriptor '" + d.name + "'");
}

}  // namespace defectlab
