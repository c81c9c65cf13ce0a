#pragma once

#include "msport/timeseries.hpp"

#include <string>
#include <vector>

namespace msport {

enum class CovMethod { Product, L1 };

/// How the L1 matrix pairs absolute deviations off the diagonal:
/// Separate uses D_i * D_j (product of mean absolute deviations), Joint uses
/// the time average of |r_i - med_i| * |r_j - med_j|.
enum class L1Pairing { Separate, Joint };

std::string to_string(CovMethod m);
CovMethod parse_cov_method(const std::string& name);
std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& name);

struct CovOptions {
    CovMethod method = CovMethod::Product;
    Aggregation aggregation = Aggregation::NonOverlapping;
    L1Pairing l1_pairing = L1Pairing::Separate;
};

struct ScaleCovariance {
    Matrix matrix;                    // per-dt-period units, not divided by dt
    Eigen::Index sample_count = 0;    // fewest rows over the panels averaged
    std::vector<bool> degenerate;     // asset had zero dispersion in some panel
};

/// Covariance of dt-aggregated returns. Non-overlapping aggregation averages
/// the estimate over all dt phase panels; overlapping uses the single
/// sliding-window panel.
ScaleCovariance cov_at_scale(const ReturnPanel& base, int dt, const CovOptions& options = {});

struct ScaledCovarianceSet {
    std::vector<std::string> asset_ids;
    std::vector<int> scales;
    std::vector<Matrix> matrices;
    std::vector<Eigen::Index> sample_counts;
    std::vector<bool> degenerate;
    CovOptions options;

    const Matrix& at_scale(int dt) const;
    Eigen::Index assets() const { return static_cast<Eigen::Index>(asset_ids.size()); }
};

ScaledCovarianceSet build_covariance_set(const ReturnPanel& base, const std::vector<int>& scales,
                                         const CovOptions& options = {});

/// InverseScale: average of Sigma(dt)/dt (per-day units). Raw: average of the
/// unnormalized Sigma(dt), i.e. the plain sum-over-scales objective.
enum class ScaleWeighting { InverseScale, Raw };

struct MultiscaleCovariance {
    std::vector<std::string> asset_ids;
    Matrix matrix;
    std::vector<int> scales;
    std::string covariance_method;  // "product" / "l1", with "+overlapping" when applicable
    std::vector<double> scale_weights;
    bool psd_repaired = false;
    double ridge = 0.0;
};

/// sum_k weight_k * Sigma(dt_k) / dt_k, then + ridge * I, then PSD repair if
/// needed. Empty `scale_weights` means equal weights 1/K.
MultiscaleCovariance multiscale_cov(const ScaledCovarianceSet& set, double ridge,
                                    std::vector<double> scale_weights = {},
                                    ScaleWeighting weighting = ScaleWeighting::InverseScale);

/// 1e-8 * trace(m) / N.
double default_ridge(const Matrix& m);

bool is_psd(const Matrix& m);

/// Clips negative eigenvalues to zero and re-symmetrizes. Matrices that are
/// already PSD (to 1e-12 relative) come back unchanged.
Matrix psd_repair(const Matrix& m);

std::string format_matrix_csv(const Matrix& m, const std::vector<std::string>& ids);

}  // namespace msport
