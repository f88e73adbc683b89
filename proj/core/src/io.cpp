#include "roughmix/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roughmix/error.hpp"

namespace roughmix::io {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
    out << 't';
    for (std::size_t c = 1; c <= path.dim(); ++c) out << ",x" << c;
    out << '\n';
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << format_double(path.grid[i]);
        for (Eigen::Index c = 0; c < path.values.cols(); ++c)
            out << ',' << format_double(path.values(static_cast<Eigen::Index>(i), c));
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() && cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::exception();
        return v;
    } catch (const std::exception&) {
        throw ConfigError("CSV line " + std::to_string(line) + ": cannot parse '" + cell + "' as a number");
    }
}

}  // namespace

SamplePath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("path CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "t") throw ConfigError("path CSV header must be t,x1,...,xd");
    const std::size_t d = header.size() - 1;

    std::vector<double> times;
    std::vector<double> flat;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != d + 1)
            throw ConfigError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) + " columns");
        times.push_back(parse_double(cells[0], lineno));
        for (std::size_t c = 1; c <= d; ++c) flat.push_back(parse_double(cells[c], lineno));
    }
    if (times.empty()) throw ConfigError("path CSV has no rows");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t c = 0; c < d; ++c)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = flat[i * d + c];
    try {
        return SamplePath(TimeGrid(std::move(times)), std::move(values));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("path CSV: ") + e.what());
    }
}

void save_path_csv(const std::filesystem::path& file, const SamplePath& path) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + file.string());
    write_path_csv(out, path);
}

SamplePath load_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + file.string());
    return read_path_csv(in);
}

void write_solution_csv(std::ostream& out, const RdeSolution& solution) {
    out << 't';
    for (Eigen::Index c = 1; c <= solution.states.cols(); ++c) out << ",y" << c;
    out << '\n';
    for (std::size_t i = 0; i < solution.times.size(); ++i) {
        out << format_double(solution.times[i]);
        for (Eigen::Index c = 0; c < solution.states.cols(); ++c)
            out << ',' << format_double(solution.states(static_cast<Eigen::Index>(i), c));
        out << '\n';
    }
}

nlohmann::json to_json(const GmfbmSpec& spec) {
    return {{"hursts", spec.hursts}, {"coeffs", spec.coeffs}, {"dim", spec.dim}, {"horizon", spec.horizon}};
}

GmfbmSpec spec_from_json(const nlohmann::json& j) {
    GmfbmSpec spec;
    try {
        spec.hursts = j.at("hursts").get<std::vector<double>>();
        spec.coeffs = j.at("coeffs").get<std::vector<double>>();
        spec.dim = j.value("dim", 1);
        spec.horizon = j.value("horizon", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("spec JSON: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json to_json(const TruncatedTensor& x) {
    nlohmann::json levels = nlohmann::json::array();
    for (int n = 0; n <= x.level(); ++n) {
        const auto data = x.level_data(n);
        levels.push_back(std::vector<double>(data.begin(), data.end()));
    }
    return {{"dim", x.dim()}, {"level", x.level()}, {"levels", levels}};
}

TruncatedTensor tensor_from_json(const nlohmann::json& j) {
    try {
        TruncatedTensor x(j.at("dim").get<int>(), j.at("level").get<int>());
        const auto& levels = j.at("levels");
        if (levels.size() != static_cast<std::size_t>(x.level()) + 1)
            throw ConfigError("tensor JSON: expected " + std::to_string(x.level() + 1) + " levels");
        for (int n = 0; n <= x.level(); ++n) {
            const auto values = levels.at(static_cast<std::size_t>(n)).get<std::vector<double>>();
            auto dst = x.level_data(n);
            if (values.size() != dst.size())
                throw ConfigError("tensor JSON: level " + std::to_string(n) + " has the wrong length");
            std::copy(values.begin(), values.end(), dst.begin());
        }
        return x;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("tensor JSON: ") + e.what());
    }
}

nlohmann::json to_json(const Level2RoughPath& rp) {
    nlohmann::json inc1 = nlohmann::json::array();
    nlohmann::json inc2 = nlohmann::json::array();
    const auto d = static_cast<Eigen::Index>(rp.dim());
    for (std::size_t i = 0; i < rp.intervals(); ++i) {
        std::vector<double> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d * d));
        for (Eigen::Index r = 0; r < d; ++r) {
            a[static_cast<std::size_t>(r)] = rp.inc1(static_cast<Eigen::Index>(i), r);
            for (Eigen::Index c = 0; c < d; ++c) b[static_cast<std::size_t>(r * d + c)] = rp.inc2[i](r, c);
        }
        inc1.push_back(a);
        inc2.push_back(b);
    }
    return {{"dim", rp.dim()}, {"p", rp.p_exponent}, {"times", rp.times}, {"inc1", inc1}, {"inc2", inc2}};
}

Level2RoughPath rough_path_from_json(const nlohmann::json& j) {
    Level2RoughPath rp;
    try {
        const auto d = j.at("dim").get<Eigen::Index>();
        rp.p_exponent = j.value("p", 2.0);
        rp.times = j.at("times").get<std::vector<double>>();
        const auto& inc1 = j.at("inc1");
        const auto& inc2 = j.at("inc2");
        if (inc1.size() != inc2.size()) throw ConfigError("level-2 JSON: inc1 and inc2 differ in length");
        rp.inc1.resize(static_cast<Eigen::Index>(inc1.size()), d);
        for (std::size_t i = 0; i < inc1.size(); ++i) {
            const auto a = inc1[i].get<std::vector<double>>();
            const auto b = inc2[i].get<std::vector<double>>();
            if (a.size() != static_cast<std::size_t>(d) || b.size() != static_cast<std::size_t>(d * d))
                throw ConfigError("level-2 JSON: interval " + std::to_string(i) + " has the wrong shape");
            Eigen::MatrixXd m(d, d);
            for (Eigen::Index r = 0; r < d; ++r) {
                rp.inc1(static_cast<Eigen::Index>(i), r) = a[static_cast<std::size_t>(r)];
                for (Eigen::Index c = 0; c < d; ++c) m(r, c) = b[static_cast<std::size_t>(r * d + c)];
            }
            rp.inc2.push_back(std::move(m));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("level-2 JSON: ") + e.what());
    }
    try {
        rp.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("level-2 JSON: ") + e.what());
    }
    return rp;
}

nlohmann::json to_json(const FitReport& report) {
    auto nullable = [](const std::vector<double>& xs) {
        nlohmann::json arr = nlohmann::json::array();
        for (double x : xs) arr.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
        return arr;
    };
    nlohmann::json j = {{"hursts_hat", report.hursts},
                        {"coeffs_sq_hat", report.coeffs_sq},
                        {"residual", report.residual},
                        {"lags", report.lags},
                        {"dt", report.dt},
                        {"hurst_se", nullable(report.hurst_se)},
                        {"coeffs_sq_se", nullable(report.coeffs_sq_se)},
                        {"requested_components", report.requested_components},
                        {"identifiable", report.identifiable},
                        {"notes", report.notes}};
    if (!report.bootstrap_hurst_se.empty()) {
        j["bootstrap_hurst_se"] = nullable(report.bootstrap_hurst_se);
        j["bootstrap_coeffs_sq_se"] = nullable(report.bootstrap_coeffs_sq_se);
    }
    return j;
}

nlohmann::json load_json(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + file.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

void save_json(const std::filesystem::path& file, const nlohmann::json& j) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

}  // namespace roughmix::io
