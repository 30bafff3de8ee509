#pragma once

// File formats: CSV matrices (one row per line, comma-separated decimals, no
// header) and JSON for packing sets, bound reports, certificates and risk
// estimates. Unbounded risks serialize as the string "unbounded".

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "sparsebound/bounds.hpp"
#include "sparsebound/errors.hpp"
#include "sparsebound/estimators.hpp"
#include "sparsebound/fano.hpp"
#include "sparsebound/linalg.hpp"
#include "sparsebound/packing.hpp"
#include "sparsebound/report.hpp"

namespace sparsebound {

using json = nlohmann::json;

class parse_error : public precondition_error {
public:
    explicit parse_error(const std::string& what) : precondition_error(what) {}
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace detail

inline DenseMatrix read_matrix_csv(std::istream& in) {
    std::vector<double> entries;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::size_t blank_run_start = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty()) {
            if (blank_run_start == 0) blank_run_start = line_no;
            continue;
        }
        if (blank_run_start != 0) {
            throw parse_error("line " + std::to_string(blank_run_start) + ": blank line inside matrix");
        }
        std::size_t row_cols = 0;
        std::size_t pos = 0;
        while (true) {
            const auto comma = body.find(',', pos);
            const auto field = detail::trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
                throw parse_error("line " + std::to_string(line_no) + ": invalid number '" + std::string(field) + "'");
            }
            entries.push_back(v);
            ++row_cols;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw parse_error("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " columns, found " + std::to_string(row_cols));
        }
        ++rows;
    }
    if (rows == 0) throw parse_error("matrix file is empty");
    return DenseMatrix(rows, cols, std::move(entries));
}

inline DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open matrix file '" + path.string() + "'");
    try {
        return read_matrix_csv(in);
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
}

inline void write_matrix_csv(std::ostream& out, const DenseMatrix& A) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) {
            if (j) s << ',';
            s << A(i, j);
        }
        s << '\n';
    }
    out << s.str();
}

// Writes to a sibling temporary file, then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw precondition_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw precondition_error("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw precondition_error("cannot move output into place at '" + path.string() + "'");
    }
}

inline json risk_to_json(const RiskValue& r) {
    if (r.is_unbounded()) return "unbounded";
    return r.value();
}

inline const char* noise_kind_name(NoiseKind k) { return k == NoiseKind::signal ? "signal" : "measurement"; }

inline json to_json(const FanoCertificate& c) {
    return json{{"size", c.size},       {"S_bar", c.S_bar},     {"entropy_term", c.entropy_term},
                {"M_cert", c.M_cert},   {"vacuous", c.vacuous}, {"packing_seed", c.packing_seed}};
}

inline json to_json(const BoundReport& r) {
    json j;
    j["n"] = r.n;
    j["m"] = r.m;
    j["k"] = r.k;
    j["sigma"] = r.sigma;
    j["log_base"] = "natural";
    j["noise_model"] = noise_kind_name(r.noise);
    if (r.whitened_rank) j["whitened_rank"] = *r.whitened_rank;
    j["bound_simple"] = risk_to_json(r.bound_simple);
    j["worst_columns_bound"] = risk_to_json(r.worst_columns.value);
    j["worst_columns_support"] = r.worst_columns.support;
    if (r.bound_fano_closed) {
        j["bound_fano_closed"] = r.bound_fano_closed->value;
        j["fano_vacuous"] = r.bound_fano_closed->vacuous;
    } else {
        j["bound_fano_closed"] = nullptr;
        j["fano_vacuous"] = nullptr;
    }
    j["beta_used"] = r.beta_used;
    if (r.bruteforce) {
        j["bruteforce_value"] = risk_to_json(r.bruteforce->value);
        j["bruteforce_support"] = r.bruteforce->support;
    } else {
        j["bruteforce_value"] = nullptr;
        j["bruteforce_support"] = nullptr;
    }
    if (r.certificate) j["certificate"] = to_json(*r.certificate);
    j["best_lower_bound"] = risk_to_json(r.best_lower_bound);
    j["reference_ds_rate"] = r.reference_ds_rate;
    j["reference_oracle_rate"] = r.reference_oracle_rate ? json(*r.reference_oracle_rate) : json(nullptr);
    return j;
}

inline json to_json(const RiskEstimate& e) {
    return json{{"estimator", e.estimator}, {"mean_risk", e.mean_risk}, {"std_error", e.std_error},
                {"trials", e.trials},       {"seed", e.seed},           {"failures", e.failures}};
}

inline json to_json(const PackingSet& P) {
    json points = json::array();
    for (const auto& x : P.points) points.push_back(json{{"support", x.support}, {"values", x.values}});
    return json{{"n", P.n},
                {"k", P.k},
                {"scale", P.scale},
                {"seed", P.seed},
                {"points", std::move(points)},
                {"measured_min_dist_sq", P.measured_min_dist_sq},
                {"measured_beta", P.measured_beta}};
}

// Parses a packing file and checks its structural invariants: sorted,
// in-range supports of size k with entries +-scale/sqrt(k).
inline PackingSet packing_from_json(const json& j) {
    PackingSet P;
    try {
        P.n = j.at("n").get<std::size_t>();
        P.k = j.at("k").get<std::size_t>();
        P.scale = j.at("scale").get<double>();
        P.seed = j.at("seed").get<std::uint64_t>();
        P.measured_min_dist_sq = j.at("measured_min_dist_sq").get<double>();
        P.measured_beta = j.at("measured_beta").get<double>();
        for (const auto& pt : j.at("points")) {
            SparseVector x{P.n, pt.at("support").get<IndexSet>(), pt.at("values").get<Vector>()};
            P.points.push_back(std::move(x));
        }
    } catch (const json::exception& e) {
        throw parse_error(std::string("packing file: ") + e.what());
    }
    detail::require(P.scale > 0.0, "packing file: scale must be positive");
    const double mag = P.scale / std::sqrt(static_cast<double>(P.k));
    for (std::size_t i = 0; i < P.points.size(); ++i) {
        const auto& x = P.points[i];
        const std::string where = "packing file: point " + std::to_string(i);
        detail::require(x.support.size() == P.k && x.values.size() == P.k, where + " must have exactly k entries");
        for (std::size_t a = 0; a < P.k; ++a) {
            detail::require(x.support[a] < P.n, where + " has an index out of range");
            detail::require(a == 0 || x.support[a - 1] < x.support[a], where + " support is not strictly increasing");
            detail::require(std::abs(std::abs(x.values[a]) - mag) <= 1e-12 * mag, where + " has a non-universe value");
        }
    }
    return P;
}

inline PackingSet read_packing(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open packing file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
    return packing_from_json(j);
}

}  // namespace sparsebound
