#include "msport/covariance.hpp"

#include "msport/error.hpp"
#include "msport/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msport {

std::string to_string(CovMethod m) { return m == CovMethod::Product ? "product" : "l1"; }

CovMethod parse_cov_method(const std::string& name) {
    if (name == "product") return CovMethod::Product;
    if (name == "l1" || name == "L1") return CovMethod::L1;
    throw Error(ErrorCode::InvalidArgument, "unknown covariance method '" + name + "' (product|l1)");
}

std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::Base: return "base";
        case Aggregation::Overlapping: return "overlapping";
        case Aggregation::NonOverlapping: return "nonoverlapping";
    }
    return "unknown";
}

Aggregation parse_aggregation(const std::string& name) {
    if (name == "overlapping") return Aggregation::Overlapping;
    if (name == "nonoverlapping" || name == "non-overlapping") return Aggregation::NonOverlapping;
    throw Error(ErrorCode::InvalidArgument, "unknown aggregation '" + name + "' (overlapping|nonoverlapping)");
}

namespace {

double median(Vector v) {
    const auto n = static_cast<std::size_t>(v.size());
    std::sort(v.data(), v.data() + n);
    return n % 2 == 1 ? v(static_cast<Eigen::Index>(n / 2))
                      : 0.5 * (v(static_cast<Eigen::Index>(n / 2 - 1)) + v(static_cast<Eigen::Index>(n / 2)));
}

Matrix sample_covariance(const Matrix& x) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
}

// Pearson correlation matrix; rows/cols of zero-variance assets are zero.
Matrix correlation_of(const Matrix& cov, std::vector<bool>& degenerate) {
    const Eigen::Index N = cov.rows();
    Matrix rho = Matrix::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (!(cov(i, i) > 0.0)) {
            degenerate[static_cast<std::size_t>(i)] = true;
            continue;
        }
        for (Eigen::Index j = 0; j < N; ++j) {
            if (cov(j, j) > 0.0) rho(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
        }
        rho(i, i) = 1.0;
    }
    return rho;
}

Matrix l1_covariance(const Matrix& x, L1Pairing pairing, std::vector<bool>& degenerate) {
    const Eigen::Index N = x.cols();
    Matrix dev(x.rows(), N);
    for (Eigen::Index a = 0; a < N; ++a) dev.col(a) = (x.col(a).array() - median(x.col(a))).abs();
    const Vector mad = dev.colwise().mean();
    Matrix rho = correlation_of(sample_covariance(x), degenerate);
    Matrix out(N, N);
    if (pairing == L1Pairing::Separate) {
        out = rho.cwiseProduct(mad * mad.transpose());
    } else {
        const Matrix joint = (dev.transpose() * dev) / static_cast<double>(x.rows());
        out = rho.cwiseProduct(joint);
    }
    for (Eigen::Index a = 0; a < N; ++a) {
        if (!(mad(a) > 0.0)) {
            degenerate[static_cast<std::size_t>(a)] = true;
            out.row(a).setZero();
            out.col(a).setZero();
        }
    }
    return out;
}

Matrix estimate(const Matrix& x, const CovOptions& options, std::vector<bool>& degenerate) {
    if (options.method == CovMethod::Product) {
        Matrix c = sample_covariance(x);
        for (Eigen::Index a = 0; a < c.rows(); ++a)
            if (!(c(a, a) > 0.0)) degenerate[static_cast<std::size_t>(a)] = true;
        return c;
    }
    return l1_covariance(x, options.l1_pairing, degenerate);
}

}  // namespace

ScaleCovariance cov_at_scale(const ReturnPanel& base, int dt, const CovOptions& options) {
    if (base.scale != 1) throw Error(ErrorCode::InvalidArgument, "cov_at_scale expects a base (scale 1) panel");
    const bool overlapping = options.aggregation == Aggregation::Overlapping;
    require_estimable_scale(base.rows(), dt, overlapping);
    const Eigen::Index N = base.assets();
    ScaleCovariance out;
    out.degenerate.assign(static_cast<std::size_t>(N), false);

    if (dt == 1) {
        out.matrix = estimate(base.returns, options, out.degenerate);
        out.sample_count = base.rows();
    } else if (overlapping) {
        out.matrix = estimate(aggregate_matrix(base.returns, dt, Aggregation::Overlapping), options, out.degenerate);
        out.sample_count = base.rows() - dt + 1;
    } else {
        out.matrix = Matrix::Zero(N, N);
        out.sample_count = base.rows();
        for (int phase = 0; phase < dt; ++phase) {
            const Matrix panel = aggregate_matrix(base.returns, dt, Aggregation::NonOverlapping, phase);
            out.matrix += estimate(panel, options, out.degenerate);
            out.sample_count = std::min(out.sample_count, panel.rows());
        }
        out.matrix /= static_cast<double>(dt);
    }
    // exact symmetry
    out.matrix = (0.5 * (out.matrix + out.matrix.transpose())).eval();
    return out;
}

const Matrix& ScaledCovarianceSet::at_scale(int dt) const {
    for (std::size_t k = 0; k < scales.size(); ++k)
        if (scales[k] == dt) return matrices[k];
    throw Error(ErrorCode::InvalidArgument, "scale " + std::to_string(dt) + " not in the covariance set");
}

ScaledCovarianceSet build_covariance_set(const ReturnPanel& base, const std::vector<int>& scales,
                                         const CovOptions& options) {
    if (scales.empty()) throw Error(ErrorCode::InvalidArgument, "scale list is empty");
    ScaledCovarianceSet set;
    set.asset_ids = base.asset_ids;
    set.scales = scales;
    set.options = options;
    set.degenerate.assign(static_cast<std::size_t>(base.assets()), false);
    for (int dt : scales) {
        ScaleCovariance c = cov_at_scale(base, dt, options);
        set.matrices.push_back(std::move(c.matrix));
        set.sample_counts.push_back(c.sample_count);
        for (std::size_t a = 0; a < c.degenerate.size(); ++a)
            if (c.degenerate[a]) set.degenerate[a] = true;
    }
    return set;
}

double default_ridge(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    return 1e-8 * m.trace() / static_cast<double>(m.rows());
}

namespace {

bool psd_within(const Eigen::SelfAdjointEigenSolver<Matrix>& eig) {
    const auto& ev = eig.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    return ev.minCoeff() >= -1e-12 * top;
}

}  // namespace

bool is_psd(const Matrix& m) {
    if (m.rows() == 0) return true;
    return psd_within(Eigen::SelfAdjointEigenSolver<Matrix>(m));
}

Matrix psd_repair(const Matrix& m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "psd_repair needs a square matrix");
    if (m.rows() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (psd_within(eig)) return m;
    const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    const Matrix r = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (r + r.transpose());
}

MultiscaleCovariance multiscale_cov(const ScaledCovarianceSet& set, double ridge, std::vector<double> scale_weights,
                                    ScaleWeighting weighting) {
    if (set.matrices.empty()) throw Error(ErrorCode::InvalidArgument, "covariance set is empty");
    if (set.matrices.size() != set.scales.size())
        throw Error(ErrorCode::DimensionMismatch, "one matrix per scale required");
    if (ridge < 0.0) throw Error(ErrorCode::InvalidArgument, "ridge must be >= 0");
    const Eigen::Index N = set.matrices.front().rows();
    for (const auto& m : set.matrices)
        if (m.rows() != N || m.cols() != N) throw Error(ErrorCode::DimensionMismatch, "per-scale matrices differ in size");
    const std::size_t K = set.matrices.size();
    if (scale_weights.empty()) scale_weights.assign(K, 1.0 / static_cast<double>(K));
    if (scale_weights.size() != K) throw Error(ErrorCode::DimensionMismatch, "one weight per scale required");

    MultiscaleCovariance out;
    out.asset_ids = set.asset_ids;
    out.scales = set.scales;
    out.covariance_method = to_string(set.options.method);
    if (set.options.aggregation == Aggregation::Overlapping) out.covariance_method += "+overlapping";
    out.scale_weights = scale_weights;
    out.ridge = ridge;
    if (K == 1 && set.scales[0] == 1 && scale_weights[0] == 1.0) {
        out.matrix = set.matrices[0];
    } else {
        out.matrix = Matrix::Zero(N, N);
        // fixed scale order keeps the floating-point sum deterministic
        for (std::size_t k = 0; k < K; ++k) {
            const double divisor = weighting == ScaleWeighting::InverseScale ? static_cast<double>(set.scales[k]) : 1.0;
            out.matrix += (scale_weights[k] / divisor) * set.matrices[k];
        }
    }
    if (ridge > 0.0) out.matrix.diagonal().array() += ridge;
    if (!is_psd(out.matrix)) {
        out.matrix = psd_repair(out.matrix);
        out.psd_repaired = true;
    }
    return out;
}

std::string format_matrix_csv(const Matrix& m, const std::vector<std::string>& ids) {
    std::ostringstream os;
    for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
    os << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_double(m(r, c));
        os << '\n';
    }
    return os.str();
}

}  // namespace msport
