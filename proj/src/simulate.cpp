#include "pcbff/simulate.hpp"

#include "pcbff/baselines.hpp"
#include "pcbff/error.hpp"
#include "pcbff/parallel.hpp"
#include "pcbff/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>

namespace pcbff::simulate {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double s = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - s) + v;
        } else {
            comp_ += (v - s) + sum_;
        }
        sum_ = s;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

template <class Get>
MeanSe mean_se(const std::vector<OcRecord>& records, Get get) {
    MeanSe out;
    if (records.empty()) {
        return out;
    }
    CompensatedSum sum;
    for (const auto& rec : records) {
        sum.add(get(rec));
    }
    const double count = static_cast<double>(records.size());
    out.mean = sum.value() / count;
    if (records.size() > 1) {
        CompensatedSum ss;
        for (const auto& rec : records) {
            const double d = get(rec) - out.mean;
            ss.add(d * d);
        }
        out.se = std::sqrt(ss.value() / (count - 1.0) / count);
    }
    return out;
}

std::uint64_t stream_id(std::size_t cell, int replicate) {
    return (static_cast<std::uint64_t>(cell) << 32) | static_cast<std::uint32_t>(replicate);
}

void check_open_unit(double v, const char* name) {
    if (!(std::abs(v) < 1.0)) {
        std::ostringstream msg;
        msg << "scenario: " << name << " must lie in (-1, 1), got " << v;
        throw DomainError(msg.str());
    }
}

// Quadratures for every positive ω* of the scenario grid, built once per n.
class QuadratureCache {
public:
    QuadratureCache(const SimScenario& scn, int n) {
        const int df = n - 3;
        bff::QuadratureOptions opts;
        opts.bins = scn.bins;
        opts.branch = scn.branch;
        opts.form = scn.form;
        for (double omega : scn.omega_grid) {
            if (omega == 0.0) {
                quads_.emplace_back(nullptr);
                continue;
            }
            const double tau2 = bff::tau2_from_omega(pcstats::EffectSize{omega}, n, 2, scn.nu);
            quads_.push_back(std::make_unique<bff::MarginalQuadrature>(
                df, densities::NormalMomentPrior{tau2, scn.nu}, opts));
        }
    }

    [[nodiscard]] const bff::MarginalQuadrature* at(std::size_t j) const {
        return quads_[j].get();
    }

private:
    std::vector<std::unique_ptr<bff::MarginalQuadrature>> quads_;
};

OcRecord run_replicate(const SimScenario& scn, const OcCell& cell, const Eigen::MatrixXd& sigma,
                       const QuadratureCache& cache, const std::vector<std::size_t>& grid_index,
                       std::size_t cell_index, int replicate) {
    CounterRng rng(scn.seed, stream_id(cell_index, replicate));
    const auto stats = pcstats::sufficient_stats(xyz_to_data(sample_mvn(sigma, cell.n, rng)));
    const auto r = pcstats::partial_corr_mle(stats);
    const auto summary = pcstats::t_statistic(r, cell.n, 2);
    const int df = summary.df();

    OcRecord rec;
    rec.replicate = replicate;
    rec.r = r.value;
    rec.t = summary.t1;
    const double lambda_true = std::sqrt(static_cast<double>(df)) * cell.omega_true;
    rec.true_log_bf = bff::true_log_bf(summary, lambda_true, scn.form);
    rec.sb_log_bf =
        baselines::stretched_beta_log_bf(r, cell.n, 1, scn.stretched_beta_alpha);

    const densities::PartialCorrDensity density(df, scn.form);
    const double log_null = specfun::student_t_logpdf(summary.t1, df);
    rec.log_bff.resize(cell.omega_grid.size());
    rec.point_log_bf.resize(cell.omega_grid.size());
    bool have_max = false;
    for (std::size_t j = 0; j < cell.omega_grid.size(); ++j) {
        const double omega = cell.omega_grid[j];
        if (omega == 0.0) {
            rec.log_bff[j] = 0.0;
            rec.point_log_bf[j] = 0.0;
        } else {
            rec.log_bff[j] = cache.at(grid_index[j])->log_m1(summary.t1) - log_null;
            const double lambda = std::sqrt(static_cast<double>(df)) * omega;
            rec.point_log_bf[j] = density.log_t(summary.t1, lambda) - log_null;
        }
        if (omega > 0.0 && omega >= cell.omega_floor &&
            (!have_max || rec.log_bff[j] > rec.max_log_bff)) {
            rec.max_log_bff = rec.log_bff[j];
            rec.omega_at_max = omega;
            have_max = true;
        }
    }
    return rec;
}

OcResult run_cells(const SimScenario& scn, std::vector<OcCell> cells) {
    std::map<int, std::unique_ptr<QuadratureCache>> caches;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        OcCell& cell = cells[c];
        auto& cache = caches[cell.n];
        if (!cache) {
            cache = std::make_unique<QuadratureCache>(scn, cell.n);
        }
        std::vector<std::size_t> grid_index;
        for (std::size_t j = 0; j < scn.omega_grid.size(); ++j) {
            if (scn.omega_grid[j] == 0.0 || scn.omega_grid[j] >= cell.omega_floor) {
                cell.omega_grid.push_back(scn.omega_grid[j]);
                grid_index.push_back(j);
            }
        }
        if (std::none_of(cell.omega_grid.begin(), cell.omega_grid.end(),
                         [&](double w) { return w > 0.0 && w >= cell.omega_floor; })) {
            std::ostringstream msg;
            msg << "scenario: omega_grid has no positive value >= " << cell.omega_floor;
            throw DomainError(msg.str());
        }

        const Eigen::MatrixXd sigma = build_sigma_with_partial(cell.rho_true, scn.nuisance_corr);

        cell.records.resize(static_cast<std::size_t>(scn.replicates));
        parallel_for(cell.records.size(), scn.threads, [&](std::size_t i) {
            cell.records[i] = run_replicate(scn, cell, sigma, *cache, grid_index, c,
                                            static_cast<int>(i));
        });
        aggregate(cell);
    }
    return OcResult{scn, std::move(cells)};
}

}  // namespace

std::string_view to_string(StudyMode mode) {
    switch (mode) {
    case StudyMode::null: return "null";
    case StudyMode::point: return "point";
    case StudyMode::sweep: return "sweep";
    }
    return "null";
}

StudyMode parse_study_mode(std::string_view text) {
    if (text == "null") {
        return StudyMode::null;
    }
    if (text == "point") {
        return StudyMode::point;
    }
    if (text == "sweep") {
        return StudyMode::sweep;
    }
    throw DomainError("unknown study mode '" + std::string(text) +
                      "' (expected null, point or sweep)");
}

std::vector<double> default_omega_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
        grid.push_back(i / 20.0);
    }
    return grid;
}

std::vector<double> default_sweep_omegas() {
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) {
        grid.push_back(i / 10.0);
    }
    return grid;
}

void validate(const SimScenario& scn) {
    if (scn.n_values.empty()) {
        throw DomainError("scenario: n list is empty");
    }
    for (int n : scn.n_values) {
        if (n < 6) {
            throw DomainError("scenario: every n must be at least 6");
        }
    }
    check_open_unit(scn.rho_true, "rho_true");
    check_open_unit(scn.nuisance_corr, "nuisance_corr");
    if (scn.replicates < 1) {
        throw DomainError("scenario: replicates must be positive");
    }
    if (!(scn.nu >= 1.0)) {
        throw DomainError("scenario: nu must be >= 1");
    }
    if (scn.bins < 1) {
        throw DomainError("scenario: bins must be positive");
    }
    if (!(scn.stretched_beta_alpha > 0.0)) {
        throw DomainError("scenario: alpha must be positive");
    }
    if (scn.omega_grid.empty()) {
        throw DomainError("scenario: omega_grid is empty");
    }
    for (std::size_t j = 0; j < scn.omega_grid.size(); ++j) {
        const double w = scn.omega_grid[j];
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("scenario: omega_grid values must be finite and >= 0");
        }
        if (j > 0 && !(w > scn.omega_grid[j - 1])) {
            throw DomainError("scenario: omega_grid must be strictly increasing");
        }
    }
    if (scn.mode == StudyMode::null && scn.rho_true != 0.0) {
        throw DomainError("scenario: a null study needs rho_true = 0");
    }
    if (scn.mode == StudyMode::point && scn.rho_true == 0.0) {
        throw DomainError("scenario: a point-alternative study needs rho_true != 0");
    }
    if (scn.mode == StudyMode::sweep) {
        if (scn.sweep_omegas.empty()) {
            throw DomainError("scenario: sweep_omegas is empty");
        }
        for (double w : scn.sweep_omegas) {
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw DomainError("scenario: sweep_omegas must be finite and positive");
            }
        }
    }
}

Eigen::Matrix3d build_sigma_with_partial(double rho_target, double nuisance_corr) {
    return build_sigma_with_partial(rho_target, nuisance_corr, nuisance_corr);
}

Eigen::Matrix3d build_sigma_with_partial(double rho_target, double rho_xz, double rho_yz) {
    check_open_unit(rho_target, "rho_target");
    check_open_unit(rho_xz, "rho_xz");
    check_open_unit(rho_yz, "rho_yz");
    const double rho_xy =
        rho_target * std::sqrt((1.0 - rho_xz * rho_xz) * (1.0 - rho_yz * rho_yz)) +
        rho_xz * rho_yz;
    Eigen::Matrix3d sigma;
    sigma << 1.0, rho_xy, rho_xz,
             rho_xy, 1.0, rho_yz,
             rho_xz, rho_yz, 1.0;
    const double minors[] = {1.0, 1.0 - rho_xy * rho_xy, sigma.determinant()};
    for (int k = 1; k < 3; ++k) {
        if (!(minors[k] > 0.0)) {
            std::ostringstream msg;
            msg << "covariance not positive definite: leading minor " << k + 1 << " = "
                << minors[k] << " (rho_xy=" << rho_xy << ", rho_xz=" << rho_xz
                << ", rho_yz=" << rho_yz << ")";
            throw ModelError(msg.str());
        }
    }
    return sigma;
}

double population_partial_corr(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() < 2 || sigma.rows() != sigma.cols()) {
        throw DomainError("population_partial_corr: need a square matrix of size >= 2");
    }
    const Eigen::MatrixXd prec = sigma.inverse();
    return -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
}

Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& sigma, int n, CounterRng& rng) {
    if (n < 1) {
        throw DomainError("sample_mvn: n must be positive");
    }
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
        throw DomainError("sample_mvn: sigma must be square and non-empty");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw ModelError("sample_mvn: sigma is not positive definite (Cholesky failed)");
    }
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::MatrixXd z(n, sigma.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            z(i, j) = rng.normal();
        }
    }
    return z * chol.transpose();
}

pcstats::DataMatrix xyz_to_data(const Eigen::MatrixXd& draws) {
    if (draws.cols() < 3) {
        throw DomainError("xyz_to_data: need at least three columns (X, Y, Z)");
    }
    pcstats::DataMatrix data;
    data.y = draws.col(1);
    data.x.resize(draws.rows(), draws.cols() - 1);
    data.x.col(0) = draws.col(0);
    data.x.rightCols(draws.cols() - 2) = draws.rightCols(draws.cols() - 2);
    data.target = 0;
    data.predictor_names.push_back("X");
    for (Eigen::Index j = 2; j < draws.cols(); ++j) {
        data.predictor_names.push_back(j == 2 ? "Z" : "Z" + std::to_string(j - 1));
    }
    return data;
}

void aggregate(OcCell& cell) {
    const auto& recs = cell.records;
    cell.grid.assign(cell.omega_grid.size(), GridAggregate{});
    for (std::size_t j = 0; j < cell.omega_grid.size(); ++j) {
        const auto bff = mean_se(recs, [j](const OcRecord& r) { return r.log_bff[j]; });
        const auto point = mean_se(recs, [j](const OcRecord& r) { return r.point_log_bf[j]; });
        cell.grid[j] = GridAggregate{cell.omega_grid[j], bff.mean, bff.se, point.mean, point.se};
    }
    CellSummary& s = cell.summary;
    const auto truth = mean_se(recs, [](const OcRecord& r) { return r.true_log_bf; });
    const auto max = mean_se(recs, [](const OcRecord& r) { return r.max_log_bff; });
    const auto sb = mean_se(recs, [](const OcRecord& r) { return r.sb_log_bf; });
    const auto dev_max = mean_se(
        recs, [](const OcRecord& r) { return std::abs(r.max_log_bff - r.true_log_bf); });
    const auto dev_sb =
        mean_se(recs, [](const OcRecord& r) { return std::abs(r.sb_log_bf - r.true_log_bf); });
    const auto diff = mean_se(recs, [](const OcRecord& r) {
        return std::abs(r.max_log_bff - r.true_log_bf) - std::abs(r.sb_log_bf - r.true_log_bf);
    });
    s.mean_true_log_bf = truth.mean;
    s.se_true_log_bf = truth.se;
    s.mean_max_log_bff = max.mean;
    s.se_max_log_bff = max.se;
    s.mean_sb_log_bf = sb.mean;
    s.se_sb_log_bf = sb.se;
    s.mean_abs_dev_max = dev_max.mean;
    s.mean_abs_dev_sb = dev_sb.mean;
    s.mean_dev_diff = diff.mean;
    s.se_dev_diff = diff.se;
}

OcResult run_null_oc(const SimScenario& scn) {
    validate(scn);
    if (scn.mode != StudyMode::null) {
        throw DomainError("run_null_oc: scenario mode must be null");
    }
    std::vector<OcCell> cells;
    for (int n : scn.n_values) {
        OcCell cell;
        cell.n = n;
        cell.omega_floor = 0.0;
        cells.push_back(std::move(cell));
    }
    return run_cells(scn, std::move(cells));
}

OcResult run_alt_oc(const SimScenario& scn) {
    validate(scn);
    std::vector<OcCell> cells;
    if (scn.mode == StudyMode::point) {
        for (int n : scn.n_values) {
            OcCell cell;
            cell.n = n;
            cell.rho_true = scn.rho_true;
            cell.omega_true = pcstats::omega_from_rho(pcstats::PartialCorr{scn.rho_true}).omega;
            cell.omega_floor = 0.0;
            cells.push_back(std::move(cell));
        }
    } else if (scn.mode == StudyMode::sweep) {
        for (int n : scn.n_values) {
            for (double omega : scn.sweep_omegas) {
                OcCell cell;
                cell.n = n;
                cell.omega_true = omega;
                cell.rho_true = pcstats::rho_from_omega(pcstats::EffectSize{omega}).value;
                cell.omega_floor = omega * (1.0 - 1e-12);
                cells.push_back(std::move(cell));
            }
        }
    } else {
        throw DomainError("run_alt_oc: scenario mode must be point or sweep");
    }
    return run_cells(scn, std::move(cells));
}

OcResult run_oc(const SimScenario& scn) {
    return scn.mode == StudyMode::null ? run_null_oc(scn) : run_alt_oc(scn);
}

std::vector<double> simulate_partial_corr(double rho_true, double nuisance_corr, int n,
                                          int replicates, std::uint64_t seed, unsigned threads) {
    if (replicates < 1) {
        throw DomainError("simulate_partial_corr: replicates must be positive");
    }
    const Eigen::MatrixXd sigma = build_sigma_with_partial(rho_true, nuisance_corr);
    std::vector<double> out(static_cast<std::size_t>(replicates));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        CounterRng rng(seed, i);
        const auto stats = pcstats::sufficient_stats(xyz_to_data(sample_mvn(sigma, n, rng)));
        out[i] = pcstats::partial_corr_mle(stats).value;
    });
    return out;
}

}  // namespace pcbff::simulate
