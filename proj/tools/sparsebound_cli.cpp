// sparsebound: minimax lower bounds for sparse estimation from the command line.
//
//   sparsebound bound     --matrix A.csv --k 4 [--sigma 1] [--noise-model measurement|signal]
//   sparsebound pack      --n 64 --k 4 [--size lemma|N] --seed 7 --out P.json
//   sparsebound certify   --matrix A.csv --packing P.json [--sigma 1]
//   sparsebound simulate  --matrix A.csv --k 4 --estimator oracle-ls|lasso|zero --trials N
//                         (--support 0,5,9,12 | --packing P.json --level M)
//   sparsebound compare   --n 256 --k 4 --m-list 40,60,80 [--trials 500]
//   sparsebound bernstein --n 16 --k 4 --size 64 --reps 2000
//
// Exit codes: 0 success, 1 usage or parse error, 2 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsebound/sparsebound.hpp"

namespace sb = sparsebound;
using sb::json;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    bool quiet = false;
};

void emit(const Globals& g, const std::string& content) {
    if (g.out.empty()) {
        std::cout << content;
    } else {
        sb::write_file_atomic(g.out, content);
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<std::size_t> parse_index_list(const std::string& s, const char* what) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v < 0) throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw sb::precondition_error(std::string(what) + ": invalid entry '" + item + "'");
        }
    }
    if (out.empty()) throw sb::precondition_error(std::string(what) + ": list is empty");
    return out;
}

sb::NoiseKind parse_noise(const std::string& s) {
    if (s == "measurement") return sb::NoiseKind::measurement;
    if (s == "signal") return sb::NoiseKind::signal;
    throw sb::precondition_error("--noise-model must be 'measurement' or 'signal'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified minimax lower bounds for sparse vector estimation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--out", g.out, "Write output to this path instead of stdout");
    app.add_flag("--quiet", g.quiet, "Suppress progress and summaries on stderr");

    // bound
    auto* bound = app.add_subcommand("bound", "Lower bounds and reference rates for a design matrix");
    bound->fallthrough();
    std::string matrix_path;
    std::size_t k = 0;
    double sigma = 1.0;
    std::string noise_model = "measurement";
    double beta = 0.0;
    double c0 = 1.0;
    std::string packing_path;
    bool certify_flag = false;
    std::size_t cap = sb::kDefaultEnumerationCap;
    bound->add_option("--matrix", matrix_path, "CSV design matrix")->required();
    bound->add_option("--k", k, "Sparsity")->required();
    bound->add_option("--sigma", sigma, "Noise standard deviation");
    bound->add_option("--noise-model", noise_model, "measurement (y = Ax + z) or signal (y = A(x + w))");
    bound->add_option("--beta", beta, "beta used in the closed-form Fano bound");
    bound->add_option("--c0", c0, "Constant of the l1 reference rate");
    bound->add_option("--packing", packing_path, "Packing file for a Fano certificate");
    bound->add_flag("--certify", certify_flag, "Build a lemma-size packing from --seed and certify");
    bound->add_option("--cap", cap, "Brute-force enumeration cap");

    // pack
    auto* pack = app.add_subcommand("pack", "Build and verify a random packing set");
    pack->fallthrough();
    std::size_t n = 0;
    std::string size_arg = "lemma";
    std::size_t max_attempts = 0;
    pack->add_option("--n", n, "Ambient dimension")->required();
    pack->add_option("--k", k, "Sparsity (even, k < n/2)")->required();
    pack->add_option("--size", size_arg, "Number of points, or 'lemma' for ceil((n/k)^(k/4))");
    pack->add_option("--max-attempts", max_attempts, "Redraw budget (default 100 * size)");

    // certify
    auto* certify = app.add_subcommand("certify", "Fano certificate for a matrix and packing");
    certify->fallthrough();
    certify->add_option("--matrix", matrix_path, "CSV design matrix")->required();
    certify->add_option("--packing", packing_path, "Packing file")->required();
    certify->add_option("--sigma", sigma, "Noise standard deviation");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo risk of an estimator");
    simulate->fallthrough();
    std::string estimator = "oracle-ls";
    std::size_t trials = 1000;
    std::string support_arg;
    double amplitude = 1.0;
    double level = 0.0;
    double lambda = 0.0;
    simulate->add_option("--matrix", matrix_path, "CSV design matrix")->required();
    simulate->add_option("--k", k, "Sparsity")->required();
    simulate->add_option("--sigma", sigma, "Noise standard deviation");
    simulate->add_option("--estimator", estimator, "oracle-ls, lasso or zero");
    simulate->add_option("--trials", trials, "Number of trials (>= 2)");
    simulate->add_option("--support", support_arg, "Comma-separated support of the fixed signal");
    simulate->add_option("--amplitude", amplitude, "Entry value of the fixed signal on its support");
    simulate->add_option("--packing", packing_path, "Packing file for the packing prior");
    simulate->add_option("--level", level, "Risk level M; points are rescaled by 4 sqrt(n M)");
    simulate->add_option("--lambda", lambda, "Lasso penalty (default 2 sigma sqrt(2 ln n) max column norm)");

    // compare
    auto* compare = app.add_subcommand("compare", "Bounds versus Lasso risk on Gaussian designs");
    compare->fallthrough();
    std::string m_list;
    compare->add_option("--n", n, "Ambient dimension")->required();
    compare->add_option("--k", k, "Sparsity")->required();
    compare->add_option("--m-list", m_list, "Comma-separated measurement counts")->required();
    compare->add_option("--sigma", sigma, "Noise standard deviation");
    compare->add_option("--trials", trials, "Trials per amplitude level");

    // bernstein
    auto* bernstein = app.add_subcommand("bernstein", "Matrix Bernstein tail versus simulation");
    bernstein->fallthrough();
    std::size_t size = 0;
    std::size_t reps = 0;
    bernstein->add_option("--n", n, "Ambient dimension")->required();
    bernstein->add_option("--k", k, "Sparsity (even, k < n/2)")->required();
    bernstein->add_option("--size", size, "Points per repetition")->required();
    bernstein->add_option("--reps", reps, "Repetitions")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (bound->parsed()) {
            const auto A = sb::read_matrix_csv(matrix_path);
            sb::ReportOptions opts;
            opts.beta = beta;
            opts.C0 = c0;
            opts.enumeration_cap = cap;
            opts.build_certificate = certify_flag;
            opts.packing_seed = g.seed;
            if (!packing_path.empty()) opts.packing = sb::read_packing(packing_path);
            const auto report = sb::full_report(A, k, sb::NoiseModel(parse_noise(noise_model), sigma), opts);
            emit(g, dump(sb::to_json(report)));
        } else if (pack->parsed()) {
            std::size_t target = 0;
            if (size_arg == "lemma") {
                target = sb::lemma_size(n, k);
            } else {
                const auto parsed = parse_index_list(size_arg, "--size");
                sb::detail::require(parsed.size() == 1, "--size takes one integer or 'lemma'");
                target = parsed.front();
            }
            const auto P = sb::build_packing(n, k, target, g.seed, max_attempts);
            const double beta_floor = sb::beta_min(n, P.size());
            json summary{{"n", n},
                         {"k", k},
                         {"size", P.size()},
                         {"seed", g.seed},
                         {"redraws", P.redraws},
                         {"min_dist_sq", sb::verify_min_distance(P)},
                         {"scatter_identity_residual", sb::scatter_identity_check(P)},
                         {"measured_beta", P.measured_beta},
                         {"beta_min", beta_floor},
                         {"p1_bound", sb::p1_bound(n, k, P.size())},
                         {"p2_bound_at_beta_min", sb::p2_bound(n, P.size(), beta_floor)}};
            if (g.out.empty()) {
                std::cout << dump(sb::to_json(P));
                if (!g.quiet) std::cerr << dump(summary);
            } else {
                sb::write_file_atomic(g.out, dump(sb::to_json(P)));
                if (!g.quiet) std::cout << dump(summary);
            }
        } else if (certify->parsed()) {
            const auto A = sb::read_matrix_csv(matrix_path);
            const auto P = sb::read_packing(packing_path);
            const auto cmp = sb::certificate_vs_closed_form(A, P, sigma);
            json j = sb::to_json(cmp.certificate);
            j["sigma"] = sigma;
            j["n"] = P.n;
            j["k"] = P.k;
            j["log_base"] = "natural";
            j["closed_form"] = cmp.closed_form.value;
            j["closed_form_vacuous"] = cmp.closed_form.vacuous;
            j["beta_used"] = P.measured_beta;
            j["closed_form_comparable"] = cmp.comparable;
            emit(g, dump(j));
        } else if (simulate->parsed()) {
            const auto A = sb::read_matrix_csv(matrix_path);
            sb::NamedEstimator est;
            if (estimator == "oracle-ls") {
                est = sb::make_oracle_ls();
            } else if (estimator == "lasso") {
                est = sb::make_lasso(lambda > 0.0 ? lambda : sb::default_lasso_lambda(A, sigma));
            } else if (estimator == "zero") {
                est = sb::make_zero_estimator();
            } else {
                throw sb::precondition_error("--estimator must be oracle-ls, lasso or zero");
            }
            sb::RiskEstimate risk;
            if (!packing_path.empty()) {
                const auto P = sb::read_packing(packing_path);
                sb::detail::require(P.k == k, "packing sparsity does not match --k");
                risk = sb::packing_bayes_risk(A, P, level, est, sigma, trials, g.seed);
            } else if (!support_arg.empty()) {
                auto T = parse_index_list(support_arg, "--support");
                std::sort(T.begin(), T.end());
                sb::detail::require(T.size() == k, "--support must list exactly k indices");
                sb::detail::require(T.back() < A.cols(), "--support index out of range");
                sb::SparseVector x{A.cols(), T, sb::Vector(k, amplitude)};
                risk = sb::mc_risk(A, est, x, sigma, trials, g.seed);
            } else {
                throw sb::precondition_error("simulate needs --support or --packing with --level");
            }
            emit(g, dump(sb::to_json(risk)));
        } else if (compare->parsed()) {
            const auto ms = parse_index_list(m_list, "--m-list");
            std::ostringstream csv;
            csv << std::setprecision(17);
            csv << "m,lower_bound,certificate,lasso_risk,oracle_rate,ds_rate\n";
            for (std::size_t m : ms) {
                if (!g.quiet) std::cerr << "compare: m = " << m << "\n";
                const auto row = sb::compare_row(n, k, m, sigma, trials, g.seed);
                csv << row.m << ',';
                if (row.lower_bound.is_unbounded()) {
                    csv << "unbounded";
                } else {
                    csv << row.lower_bound.value();
                }
                csv << ',';
                if (row.certificate) csv << row.certificate->M_cert;
                csv << ',' << row.lasso.mean_risk << ',';
                if (row.oracle_rate) csv << *row.oracle_rate;
                csv << ',' << row.ds_rate << '\n';
            }
            emit(g, csv.str());
        } else if (bernstein->parsed()) {
            const auto st = sb::bernstein_empirical(n, k, size, reps, g.seed);
            json rows = json::array();
            for (const auto& r : st.rows)
                rows.push_back({{"t", r.t}, {"empirical", r.empirical}, {"std_error", r.std_error}, {"analytic", r.analytic}});
            json j{{"n", n},
                   {"k", k},
                   {"size", size},
                   {"reps", reps},
                   {"seed", g.seed},
                   {"rho_sq", st.rho_sq},
                   {"rows", rows},
                   {"draws", st.draws},
                   {"max_term_norm", st.max_term_norm},
                   {"term_norm_violations", st.term_norm_violations}};
            emit(g, dump(j));
        }
    } catch (const sb::precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sb::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
