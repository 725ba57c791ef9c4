#pragma once

#include "pcbff/bff.hpp"
#include "pcbff/densities.hpp"
#include "pcbff/pcstats.hpp"
#include "pcbff/random.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pcbff::simulate {

/// Which operating-characteristic study a scenario describes.
///   null: data under ρ* = 0, BFF over the ω* grid.
///   point: data under a fixed ρ* ≠ 0, BFF over the ω* grid.
///   sweep: true ω swept over `sweep_omegas`; the BFF maximum is restricted to ω* ≥ ω.
enum class StudyMode { null, point, sweep };

[[nodiscard]] std::string_view to_string(StudyMode mode);
[[nodiscard]] StudyMode parse_study_mode(std::string_view text);

[[nodiscard]] std::vector<double> default_omega_grid();   // 0, 0.05, ..., 1
[[nodiscard]] std::vector<double> default_sweep_omegas(); // 0.1, 0.2, ..., 0.9

struct SimScenario {
    StudyMode mode = StudyMode::null;
    std::vector<int> n_values{25, 50, 100};
    double rho_true = 0.0;       ///< used by null (must be 0) and point modes
    double nuisance_corr = 0.3;  ///< ρ_XZ = ρ_YZ
    int replicates = 2000;
    std::uint64_t seed = 20250101;
    double nu = 1.0;
    std::vector<double> omega_grid = default_omega_grid();
    std::vector<double> sweep_omegas = default_sweep_omegas();
    int bins = 1000;  ///< quadrature bins per BFF evaluation
    double stretched_beta_alpha = 0.5;
    bff::Branch branch = bff::Branch::symmetric;
    densities::DensityForm form = densities::DensityForm::exact;
    unsigned threads = 0;
};

/// Throws DomainError describing the first invalid field.
void validate(const SimScenario& scenario);

struct OcRecord {
    int replicate = 0;
    double r = 0.0;
    double t = 0.0;
    double true_log_bf = 0.0;   ///< point-alternative BF at the generating λ
    double max_log_bff = 0.0;
    double omega_at_max = 0.0;
    double sb_log_bf = 0.0;     ///< stretched-beta baseline
    std::vector<double> log_bff;       ///< one per cell grid point
    std::vector<double> point_log_bf;  ///< log f(t|λ(ω*)) − log f(t|0), one per grid point
};

struct GridAggregate {
    double omega_star = 0.0;
    double mean_log_bff = 0.0;
    double se_log_bff = 0.0;
    double mean_point_log_bf = 0.0;
    double se_point_log_bf = 0.0;
};

struct CellSummary {
    double mean_true_log_bf = 0.0;
    double se_true_log_bf = 0.0;
    double mean_max_log_bff = 0.0;
    double se_max_log_bff = 0.0;
    double mean_sb_log_bf = 0.0;
    double se_sb_log_bf = 0.0;
    double mean_abs_dev_max = 0.0;  ///< mean |max log BFF − true log BF|
    double mean_abs_dev_sb = 0.0;   ///< mean |stretched-beta log BF − true log BF|
    double mean_dev_diff = 0.0;     ///< mean of the paired difference of the two above
    double se_dev_diff = 0.0;
};

/// One (n, true effect) combination of a study.
struct OcCell {
    int n = 0;
    double omega_true = 0.0;
    double rho_true = 0.0;
    double omega_floor = 0.0;  ///< the BFF maximum is taken over ω* ≥ omega_floor
    std::vector<double> omega_grid;
    std::vector<OcRecord> records;
    std::vector<GridAggregate> grid;
    CellSummary summary;
};

struct OcResult {
    SimScenario scenario;
    std::vector<OcCell> cells;
};

/// Population correlation matrix of (X, Y, Z) with unit variances,
/// ρ_XZ = ρ_YZ = nuisance_corr and partial correlation ρ_XY·Z = rho_target.
/// @throws ModelError naming the leading minor that is not positive
[[nodiscard]] Eigen::Matrix3d build_sigma_with_partial(double rho_target, double nuisance_corr);

/// General form with separate ρ_XZ and ρ_YZ.
[[nodiscard]] Eigen::Matrix3d build_sigma_with_partial(double rho_target, double rho_xz,
                                                       double rho_yz);

/// Partial correlation of the first two variables given the rest.
[[nodiscard]] double population_partial_corr(const Eigen::MatrixXd& sigma);

/// n iid N(0, sigma) rows, L·z with L the Cholesky factor.
/// @throws ModelError if sigma is not positive definite
[[nodiscard]] Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& sigma, int n, CounterRng& rng);

/// Columns (X, Y, Z, ...) → response Y, predictors (X, Z, ...), target X.
[[nodiscard]] pcstats::DataMatrix xyz_to_data(const Eigen::MatrixXd& draws);

/// Recomputes the per-grid aggregates and the cell summary from cell.records.
void aggregate(OcCell& cell);

/// Runs a null-hypothesis study (scenario.mode must be null, rho_true 0).
[[nodiscard]] OcResult run_null_oc(const SimScenario& scenario);

/// Runs a point-alternative or sweep study.
[[nodiscard]] OcResult run_alt_oc(const SimScenario& scenario);

/// Dispatches on scenario.mode.
[[nodiscard]] OcResult run_oc(const SimScenario& scenario);

/// Simulated r* values (p = 2: target X, conditioning Z) for a quick check of
/// the sampling density; replicate i uses stream i under `seed`.
[[nodiscard]] std::vector<double> simulate_partial_corr(double rho_true, double nuisance_corr,
                                                        int n, int replicates,
                                                        std::uint64_t seed, unsigned threads = 0);

}  // namespace pcbff::simulate
