#include "pcbff/io.hpp"

#include "pcbff/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace pcbff::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t");
        const auto last = field.find_last_not_of(" \t");
        out.push_back(first == std::string::npos ? std::string()
                                                 : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
        throw DomainError("column '" + name + "' not found in CSV header");
    }
    return static_cast<std::size_t>(it - table.header.begin());
}

std::string density_name(densities::DensityForm form) {
    return form == densities::DensityForm::exact ? "exact" : "reference";
}

densities::DensityForm parse_density(std::string_view text) {
    if (text == "exact") {
        return densities::DensityForm::exact;
    }
    if (text == "reference") {
        return densities::DensityForm::reference;
    }
    throw DomainError("unknown density form '" + std::string(text) +
                      "' (expected exact or reference)");
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, value);
    if (text.empty() || res.ec != std::errc() || res.ptr != last) {
        throw DomainError("cannot parse '" + std::string(text) + "' as a number (" +
                          std::string(what) + ")");
    }
    return value;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "CSV line " << line_no << " has " << fields.size() << " fields, header has "
                << table.header.size();
            throw DomainError(msg.str());
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) {
        throw DomainError("CSV input is empty (a header line is required)");
    }
    return table;
}

pcstats::DataMatrix data_from_table(const CsvTable& table, const ColumnSpec& spec) {
    if (table.header.size() < 2) {
        throw DomainError("CSV needs at least a response and one predictor column");
    }
    const std::size_t resp = spec.response.empty() ? 0 : column_index(table, spec.response);
    std::size_t target = 0;
    if (spec.target.empty()) {
        target = resp == 0 ? 1 : 0;
    } else {
        target = column_index(table, spec.target);
    }
    if (target == resp) {
        throw DomainError("the target predictor cannot be the response column");
    }

    std::vector<std::size_t> order{target};
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j != resp && j != target) {
            order.push_back(j);
        }
    }

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    pcstats::DataMatrix data;
    data.y.resize(n);
    data.x.resize(n, static_cast<Eigen::Index>(order.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const std::string where = "row " + std::to_string(i + 1);
        data.y(i) = parse_double(row[resp], where + ", column " + table.header[resp]);
        for (std::size_t k = 0; k < order.size(); ++k) {
            data.x(i, static_cast<Eigen::Index>(k)) =
                parse_double(row[order[k]], where + ", column " + table.header[order[k]]);
        }
    }
    data.target = 0;
    for (std::size_t k : order) {
        data.predictor_names.push_back(table.header[k]);
    }
    return data;
}

pcstats::DataMatrix read_data_csv(const std::string& path, const ColumnSpec& spec) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open data file '" + path + "'");
    }
    return data_from_table(read_csv(in), spec);
}

void write_curve_csv(std::ostream& out, const bff::BffCurve& curve) {
    out << "rho_mode,omega,tau2,log_bf10\n";
    for (const auto& pt : curve.points) {
        out << format_double(pt.rho_mode) << ',' << format_double(pt.omega) << ','
            << format_double(pt.tau2) << ',' << format_double(pt.log_bf10) << '\n';
    }
}

void write_curve_json(std::ostream& out, const bff::BffCurve& curve) {
    // Numbers go through format_double so the text matches the CSV writer.
    std::ostringstream body;
    body << "{\n  \"t\": " << format_double(curve.summary.t1)
         << ",\n  \"n\": " << curve.summary.n << ",\n  \"p\": " << curve.summary.p
         << ",\n  \"df\": " << curve.summary.df() << ",\n  \"nu\": " << format_double(curve.nu)
         << ",\n  \"bins\": " << curve.quadrature_bins << ",\n  \"branch\": \""
         << bff::to_string(curve.branch) << "\",\n  \"density\": \"" << density_name(curve.form)
         << "\",\n  \"points\": [";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& pt = curve.points[i];
        body << (i == 0 ? "\n" : ",\n") << "    {\"rho_mode\": " << format_double(pt.rho_mode)
             << ", \"omega\": " << format_double(pt.omega)
             << ", \"tau2\": " << format_double(pt.tau2)
             << ", \"log_bf10\": " << format_double(pt.log_bf10) << '}';
    }
    body << "\n  ]\n}\n";
    out << body.str();
}

void write_oc_records_csv(std::ostream& out, const simulate::OcResult& result) {
    const auto& grid = result.scenario.omega_grid;
    out << "n,omega_true,rho_true,replicate,r,t,true_log_bf,max_log_bff,omega_at_max,sb_log_bf";
    for (double w : grid) {
        out << ",log_bff@" << format_double(w);
    }
    for (double w : grid) {
        out << ",point_log_bf@" << format_double(w);
    }
    out << '\n';
    for (const auto& cell : result.cells) {
        std::vector<std::ptrdiff_t> slot(grid.size(), -1);
        for (std::size_t j = 0; j < cell.omega_grid.size(); ++j) {
            const auto it = std::find(grid.begin(), grid.end(), cell.omega_grid[j]);
            slot[static_cast<std::size_t>(it - grid.begin())] = static_cast<std::ptrdiff_t>(j);
        }
        for (const auto& rec : cell.records) {
            out << cell.n << ',' << format_double(cell.omega_true) << ','
                << format_double(cell.rho_true) << ',' << rec.replicate << ','
                << format_double(rec.r) << ',' << format_double(rec.t) << ','
                << format_double(rec.true_log_bf) << ',' << format_double(rec.max_log_bff) << ','
                << format_double(rec.omega_at_max) << ',' << format_double(rec.sb_log_bf);
            for (auto s : slot) {
                out << ',';
                if (s >= 0) {
                    out << format_double(rec.log_bff[static_cast<std::size_t>(s)]);
                }
            }
            for (auto s : slot) {
                out << ',';
                if (s >= 0) {
                    out << format_double(rec.point_log_bf[static_cast<std::size_t>(s)]);
                }
            }
            out << '\n';
        }
    }
}

void write_oc_aggregates_csv(std::ostream& out, const simulate::OcResult& result) {
    out << "n,omega_true,rho_true,omega_star,mean_log_bff,se_log_bff,mean_point_log_bf,"
           "se_point_log_bf,mean_true_log_bf,se_true_log_bf,mean_max_log_bff,se_max_log_bff,"
           "mean_sb_log_bf,se_sb_log_bf,mean_abs_dev_max,mean_abs_dev_sb,mean_dev_diff,"
           "se_dev_diff\n";
    for (const auto& cell : result.cells) {
        const auto& s = cell.summary;
        for (const auto& g : cell.grid) {
            out << cell.n << ',' << format_double(cell.omega_true) << ','
                << format_double(cell.rho_true) << ',' << format_double(g.omega_star) << ','
                << format_double(g.mean_log_bff) << ',' << format_double(g.se_log_bff) << ','
                << format_double(g.mean_point_log_bf) << ','
                << format_double(g.se_point_log_bf) << ',' << format_double(s.mean_true_log_bf)
                << ',' << format_double(s.se_true_log_bf) << ','
                << format_double(s.mean_max_log_bff) << ',' << format_double(s.se_max_log_bff)
                << ',' << format_double(s.mean_sb_log_bf) << ','
                << format_double(s.se_sb_log_bf) << ',' << format_double(s.mean_abs_dev_max)
                << ',' << format_double(s.mean_abs_dev_sb) << ','
                << format_double(s.mean_dev_diff) << ',' << format_double(s.se_dev_diff)
                << '\n';
        }
    }
}

std::vector<simulate::OcCell> read_oc_records_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    constexpr std::size_t kFixed = 10;
    if (table.header.size() < kFixed || (table.header.size() - kFixed) % 2 != 0) {
        throw DomainError("records CSV has an unexpected header");
    }
    const std::size_t grid_size = (table.header.size() - kFixed) / 2;
    std::vector<double> grid(grid_size);
    const std::string prefix = "log_bff@";
    for (std::size_t j = 0; j < grid_size; ++j) {
        const auto& name = table.header[kFixed + j];
        if (name.rfind(prefix, 0) != 0) {
            throw DomainError("records CSV: unexpected column '" + name + "'");
        }
        grid[j] = parse_double(std::string_view(name).substr(prefix.size()), name);
    }

    std::vector<simulate::OcCell> cells;
    for (const auto& row : table.rows) {
        const int n = static_cast<int>(parse_double(row[0], "n"));
        const double omega_true = parse_double(row[1], "omega_true");
        if (cells.empty() || cells.back().n != n || cells.back().omega_true != omega_true) {
            simulate::OcCell cell;
            cell.n = n;
            cell.omega_true = omega_true;
            cell.rho_true = parse_double(row[2], "rho_true");
            for (std::size_t j = 0; j < grid_size; ++j) {
                if (!row[kFixed + j].empty()) {
                    cell.omega_grid.push_back(grid[j]);
                }
            }
            cells.push_back(std::move(cell));
        }
        simulate::OcRecord rec;
        rec.replicate = static_cast<int>(parse_double(row[3], "replicate"));
        rec.r = parse_double(row[4], "r");
        rec.t = parse_double(row[5], "t");
        rec.true_log_bf = parse_double(row[6], "true_log_bf");
        rec.max_log_bff = parse_double(row[7], "max_log_bff");
        rec.omega_at_max = parse_double(row[8], "omega_at_max");
        rec.sb_log_bf = parse_double(row[9], "sb_log_bf");
        for (std::size_t j = 0; j < grid_size; ++j) {
            if (!row[kFixed + j].empty()) {
                rec.log_bff.push_back(parse_double(row[kFixed + j], "log_bff"));
                rec.point_log_bf.push_back(
                    parse_double(row[kFixed + grid_size + j], "point_log_bf"));
            }
        }
        cells.back().records.push_back(std::move(rec));
    }
    for (auto& cell : cells) {
        simulate::aggregate(cell);
    }
    return cells;
}

simulate::SimScenario scenario_from_json(std::string_view text) {
    using nlohmann::json;
    simulate::SimScenario scn;
    try {
        const json doc = json::parse(text);
        if (!doc.is_object()) {
            throw DomainError("scenario JSON must be an object");
        }
        for (const auto& [key, value] : doc.items()) {
            if (key == "mode") {
                scn.mode = simulate::parse_study_mode(value.get<std::string>());
            } else if (key == "n") {
                scn.n_values = value.is_array() ? value.get<std::vector<int>>()
                                                : std::vector<int>{value.get<int>()};
            } else if (key == "rho_true") {
                scn.rho_true = value.get<double>();
            } else if (key == "nuisance_corr") {
                scn.nuisance_corr = value.get<double>();
            } else if (key == "replicates") {
                scn.replicates = value.get<int>();
            } else if (key == "seed") {
                scn.seed = value.get<std::uint64_t>();
            } else if (key == "nu") {
                scn.nu = value.get<double>();
            } else if (key == "omega_grid") {
                scn.omega_grid = value.get<std::vector<double>>();
            } else if (key == "sweep_omegas") {
                scn.sweep_omegas = value.get<std::vector<double>>();
            } else if (key == "bins") {
                scn.bins = value.get<int>();
            } else if (key == "alpha") {
                scn.stretched_beta_alpha = value.get<double>();
            } else if (key == "branch") {
                scn.branch = bff::parse_branch(value.get<std::string>());
            } else if (key == "density") {
                scn.form = parse_density(value.get<std::string>());
            } else if (key == "threads") {
                scn.threads = value.get<unsigned>();
            } else {
                throw DomainError("unknown scenario key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string("invalid scenario JSON: ") + e.what());
    }
    simulate::validate(scn);
    return scn;
}

simulate::SimScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return scenario_from_json(text.str());
}

std::string scenario_to_json(const simulate::SimScenario& scn) {
    nlohmann::json doc;
    doc["mode"] = std::string(simulate::to_string(scn.mode));
    doc["n"] = scn.n_values;
    doc["rho_true"] = scn.rho_true;
    doc["nuisance_corr"] = scn.nuisance_corr;
    doc["replicates"] = scn.replicates;
    doc["seed"] = scn.seed;
    doc["nu"] = scn.nu;
    doc["omega_grid"] = scn.omega_grid;
    doc["sweep_omegas"] = scn.sweep_omegas;
    doc["bins"] = scn.bins;
    doc["alpha"] = scn.stretched_beta_alpha;
    doc["branch"] = std::string(bff::to_string(scn.branch));
    doc["density"] = density_name(scn.form);
    doc["threads"] = scn.threads;
    return doc.dump(2);
}

}  // namespace pcbff::io
