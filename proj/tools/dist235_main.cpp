// Command-line driver: model validation, the conformal cone through two
// independent pipelines, binary-quartic evaluation, and a corpus runner.
// Exit codes: 0 all verdicts pass, 1 a verdict fails or the data is
// degenerate at the requested point, 2 usage/parse/IO errors.

#include <dist235/model.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace dist235;

constexpr int kExitPass = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitInput = 2;

struct Options {
    std::string model_path;
    std::vector<double> point;
    std::vector<double> direction;
    std::string route = "both";
    int n_fiber = 32;
    int n_cone = 12;
    double tol = 1e-5;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string corpus_dir;
};

// Directions probed when the quartic command runs without --direction, and
// by the corpus quartic suite; fixed angles keep reports byte-deterministic.
constexpr std::array<double, 3> kProbeAngles{0.3, 1.2, 2.0};

Point to_point(const std::vector<double>& v) { return Point(v.begin(), v.end()); }

std::vector<Point> select_points(const ModelFile& m, const Options& o) {
    if (!o.point.empty()) return {to_point(o.point)};
    if (!m.points.empty()) return m.points;
    std::mt19937_64 g(o.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < 3; ++i) {
        Point p(5);
        for (double& c : p) c = u(g);
        pts.push_back(std::move(p));
    }
    return pts;
}

double relative_gap(double a, double b) {
    return std::abs(a - b) / (1 + std::max(std::abs(a), std::abs(b)));
}

Json check_entry(const AdaptedFrame& f, const Point& q) {
    Json entry;
    entry["point"] = json_point(q);
    const GrowthVector g = growth_vector(f, q);
    entry["growth"] = Json{g.d1, g.d2, g.d3};
    entry["frame_basis"] = json_frame_basis(f, q);
    if (g.is_235()) entry["reconstruction_residual"] = reconstruction_residual(f, q);
    entry["verdict"] = g.is_235();
    return entry;
}

Json run_check(const ModelFile& m, const Options& o, bool& ok) {
    const AdaptedFrame f = build_adapted_frame(m.distribution);
    Json report;
    report["command"] = "check";
    report["model"] = m.name;
    report["seed"] = o.seed;
    report["points"] = Json::array();
    for (const Point& q : select_points(m, o)) {
        Json entry = check_entry(f, q);
        ok = ok && entry["verdict"].get<bool>();
        report["points"].push_back(std::move(entry));
    }
    report["verdict"] = ok;
    return report;
}

bool is_32(const Signature& s) { return s.positive == 3 && s.negative == 2 && s.zero == 0; }

Json cone_entry(const AdaptedFrame& f, const FiberFunctions& ff, const Point& q,
                const Options& o) {
    Json entry;
    entry["point"] = json_point(q);
    try {
        entry["frame_basis"] = json_frame_basis(f, q);
        bool verdict = true;
        QuadraticForm5 closed, geometric;
        if (o.route != "geometric") {
            closed = xi_closed_form(f, ff, q);
            entry["cone_closed"] = json_matrix(closed);
        }
        if (o.route != "closed") {
            const auto [m, fit] = xi_geometric(f, q, o.n_fiber, o.n_cone);
            geometric = m;
            entry["cone_geometric"] = json_matrix(geometric);
            entry["fit_gap"] = fit.gap;
        }
        const Signature sig = signature(o.route == "geometric" ? geometric : closed);
        entry["signature"] = json_signature(sig);
        verdict = is_32(sig);
        if (o.route == "both") {
            const double residual = conformal_residual(closed, geometric);
            entry["conformal_residual"] = residual;
            verdict = verdict && residual <= o.tol;
        }
        entry["verdict"] = verdict;
    } catch (const degenerate_error& e) {
        entry["error"] = e.what();
        entry["verdict"] = false;
    } catch (const eval_error& e) {
        entry["error"] = e.what();
        entry["verdict"] = false;
    }
    return entry;
}

Json run_cone(const ModelFile& m, const Options& o, bool& ok) {
    const AdaptedFrame f = build_adapted_frame(m.distribution);
    const FiberFunctions ff = fiber_functions(f);
    Json report;
    report["command"] = "cone";
    report["model"] = m.name;
    report["route"] = o.route;
    report["n_fiber"] = o.n_fiber;
    report["n_cone"] = o.n_cone;
    report["tolerance"] = o.tol;
    report["seed"] = o.seed;
    report["points"] = Json::array();
    for (const Point& q : select_points(m, o)) {
        Json entry = cone_entry(f, ff, q, o);
        ok = ok && entry["verdict"].get<bool>();
        report["points"].push_back(std::move(entry));
    }
    report["verdict"] = ok;
    return report;
}

// One jet per direction feeds both routes.
std::pair<double, double> quartic_both_routes(const AdaptedFrame& f, const VectorField& h,
                                              const Point& q, const Eigen::Vector2d& v) {
    const CotangentPoint lam = lambda_for_direction(f, q, v);
    const AdChain chain(f, chart_for(lam), 7);
    const CurveJet jet = quotient_jet(chain, h, lam);
    return {cartan_quartic_at(jet), cartan_quartic_via_w2(jet)};
}

Json quartic_entry(const AdaptedFrame& f, const VectorField& h, const Point& q,
                   const Options& o) {
    Json entry;
    entry["point"] = json_point(q);
    try {
        entry["frame_basis"] = json_frame_basis(f, q);
        require_235(f, q);
        bool verdict = true;
        if (o.direction.size() == 2) {
            const Eigen::Vector2d v(o.direction[0], o.direction[1]);
            const auto [reduction, parent] = quartic_both_routes(f, h, q, v);
            entry["direction"] = Json{v(0), v(1)};
            entry["value"] = reduction;
            entry["value_parent_route"] = parent;
            entry["route_agreement"] = relative_gap(reduction, parent);
            verdict = entry["route_agreement"].get<double>() <= o.tol;
        } else {
            const BinaryQuartic bq = quartic_polynomial(f, q);
            Json coeffs = Json::array();
            for (const double a : bq.a) coeffs.push_back(a);
            entry["coefficients"] = std::move(coeffs);
            double worst = 0;
            for (const double psi : kProbeAngles) {
                const Eigen::Vector2d v(std::cos(psi), std::sin(psi));
                const auto [reduction, parent] = quartic_both_routes(f, h, q, v);
                worst = std::max(worst, relative_gap(reduction, parent));
            }
            entry["route_agreement"] = worst;
            verdict = worst <= o.tol;
        }
        entry["verdict"] = verdict;
    } catch (const degenerate_error& e) {
        entry["error"] = e.what();
        entry["verdict"] = false;
    } catch (const eval_error& e) {
        entry["error"] = e.what();
        entry["verdict"] = false;
    }
    return entry;
}

Json run_quartic(const ModelFile& m, const Options& o, bool& ok) {
    if (!o.direction.empty() && o.direction.size() != 2)
        throw std::invalid_argument("--direction needs exactly 2 components");
    const AdaptedFrame f = build_adapted_frame(m.distribution);
    const VectorField h = build_h_field(f);
    Json report;
    report["command"] = "quartic";
    report["model"] = m.name;
    report["tolerance"] = o.tol;
    report["seed"] = o.seed;
    report["points"] = Json::array();
    for (const Point& q : select_points(m, o)) {
        Json entry = quartic_entry(f, h, q, o);
        ok = ok && entry["verdict"].get<bool>();
        report["points"].push_back(std::move(entry));
    }
    report["verdict"] = ok;
    return report;
}

// Corpus verdict thresholds: a model expected flat must have all quartic
// coefficients below kFlatTol at every sample point; a model expected
// non-flat must exceed kNonflatMin somewhere.
constexpr double kFlatTol = 1e-6;
constexpr double kNonflatMin = 1e-4;

Json corpus_model_entry(const std::filesystem::path& path, const Options& o, bool& ok,
                        bool& io_failed) {
    Json entry;
    entry["file"] = path.filename().string();
    ModelFile m;
    try {
        m = load_model(path.string());
    } catch (const model_error& e) {
        entry["error"] = e.what();
        entry["verdict"] = false;
        io_failed = true;
        ok = false;
        return entry;
    }
    entry["model"] = m.name;
    if (!m.expect.empty()) {
        Json expect;
        for (const auto& [key, value] : m.expect) expect[key] = value;
        entry["expect"] = std::move(expect);
    }

    const AdaptedFrame f = build_adapted_frame(m.distribution);
    const std::vector<Point> points = m.points.empty() ? std::vector<Point>{Point(5, 0.0)}
                                                       : m.points;
    const bool expect_valid = m.expect.count("valid") ? m.expect.at("valid") : true;

    bool all_235 = true;
    Json check = Json::array();
    for (const Point& q : points) {
        Json ce = check_entry(f, q);
        all_235 = all_235 && ce["verdict"].get<bool>();
        check.push_back(std::move(ce));
    }
    entry["check"] = std::move(check);
    entry["check_verdict"] = (all_235 == expect_valid);
    bool verdict = entry["check_verdict"].get<bool>();

    if (all_235) {
        const FiberFunctions ff = fiber_functions(f);
        Options cone_opts = o;
        cone_opts.route = "both";
        bool cone_ok = true;
        Json cone = Json::array();
        for (const Point& q : points) {
            Json pe = cone_entry(f, ff, q, cone_opts);
            cone_ok = cone_ok && pe["verdict"].get<bool>();
            cone.push_back(std::move(pe));
        }
        entry["cone"] = std::move(cone);
        entry["cone_verdict"] = cone_ok;
        verdict = verdict && cone_ok;

        Options quartic_opts = o;
        quartic_opts.direction.clear();
        const VectorField h = build_h_field(f);
        bool quartic_ok = true;
        double max_coeff = 0;
        Json quartic = Json::array();
        for (const Point& q : points) {
            Json pe = quartic_entry(f, h, q, quartic_opts);
            quartic_ok = quartic_ok && pe["verdict"].get<bool>();
            if (pe.contains("coefficients"))
                for (const Json& c : pe["coefficients"])
                    max_coeff = std::max(max_coeff, std::abs(c.get<double>()));
            quartic.push_back(std::move(pe));
        }
        entry["quartic"] = std::move(quartic);
        entry["quartic_verdict"] = quartic_ok;
        verdict = verdict && quartic_ok;

        if (m.expect.count("flat")) {
            const bool flat_ok = m.expect.at("flat") ? max_coeff <= kFlatTol
                                                     : max_coeff > kNonflatMin;
            entry["max_quartic_coefficient"] = max_coeff;
            entry["flat_verdict"] = flat_ok;
            verdict = verdict && flat_ok;
        }
    }

    entry["verdict"] = verdict;
    ok = ok && verdict;
    return entry;
}

Json run_corpus(const Options& o, bool& ok, bool& io_failed) {
    std::vector<std::filesystem::path> files;
    for (const auto& de : std::filesystem::directory_iterator(o.corpus_dir))
        if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
    std::sort(files.begin(), files.end());

    Json report;
    report["command"] = "corpus";
    report["directory"] = o.corpus_dir;
    report["tolerance"] = o.tol;
    report["n_fiber"] = o.n_fiber;
    report["n_cone"] = o.n_cone;
    report["seed"] = o.seed;
    report["warnings"] = Json::array();
    if (files.empty()) report["warnings"].push_back("no model files found");
    report["models"] = Json::array();
    for (const auto& path : files)
        report["models"].push_back(corpus_model_entry(path, o, ok, io_failed));
    report["verdict"] = ok;
    return report;
}

void emit(const Json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw model_error("cannot write report file: " + out_path);
    out << text;
}

void require_point_shape(const Options& o) {
    if (!o.point.empty() && o.point.size() != 5)
        throw std::invalid_argument("--point needs exactly 5 coordinates");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rank-2 distributions on 5-manifolds: growth validation, the canonical "
                 "conformal cone, and the fundamental binary quartic"};
    app.require_subcommand(1);
    Options o;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--tol", o.tol, "verdict tolerance")->capture_default_str();
        cmd->add_option("--seed", o.seed, "seed for fallback sample points")
            ->capture_default_str();
        cmd->add_option("--out", o.out_path, "report file (default stdout)");
    };
    const auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--model", o.model_path, "model JSON file")->required();
        cmd->add_option("--point", o.point, "base point a,b,c,d,e")->delimiter(',');
    };
    const auto add_sampling = [&](CLI::App* cmd) {
        cmd->add_option("--n-fiber", o.n_fiber, "fiber directions for the geometric route")
            ->capture_default_str();
        cmd->add_option("--n-cone", o.n_cone, "points per covector cone")->capture_default_str();
    };

    CLI::App* check = app.add_subcommand(
        "check", "growth vector and frame-reconstruction residuals at sample points");
    add_model(check);
    add_common(check);

    CLI::App* cone = app.add_subcommand("cone", "conformal cone matrix in the frame basis");
    add_model(cone);
    add_sampling(cone);
    add_common(cone);
    cone->add_option("--route", o.route, "closed | geometric | both")
        ->check(CLI::IsMember({"closed", "geometric", "both"}))
        ->capture_default_str();

    CLI::App* crosscheck =
        app.add_subcommand("crosscheck", "cone with both routes and their residual");
    add_model(crosscheck);
    add_sampling(crosscheck);
    add_common(crosscheck);

    CLI::App* quartic =
        app.add_subcommand("quartic", "binary quartic value or coefficients at a point");
    add_model(quartic);
    add_common(quartic);
    quartic->add_option("--direction", o.direction, "tangent direction v1,v2 in the frame basis")
        ->delimiter(',');

    CLI::App* corpus = app.add_subcommand("corpus", "run all suites over a model directory");
    corpus->add_option("dir", o.corpus_dir, "directory of model JSON files")->required();
    add_sampling(corpus);
    add_common(corpus);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitInput;
    }

    try {
        bool ok = true;
        bool io_failed = false;
        Json report;
        if (*check) {
            require_point_shape(o);
            report = run_check(load_model(o.model_path), o, ok);
        } else if (*cone || *crosscheck) {
            require_point_shape(o);
            if (*crosscheck) o.route = "both";
            report = run_cone(load_model(o.model_path), o, ok);
        } else if (*quartic) {
            require_point_shape(o);
            report = run_quartic(load_model(o.model_path), o, ok);
        } else {
            report = run_corpus(o, ok, io_failed);
        }
        emit(report, o.out_path);
        if (io_failed) return kExitInput;
        return ok ? kExitPass : kExitVerdict;
    } catch (const model_error& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitInput;
    } catch (const parse_error& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitInput;
    } catch (const degenerate_error& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitVerdict;
    } catch (const eval_error& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitVerdict;
    } catch (const std::invalid_argument& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "dist235: " << e.what() << '\n';
        return kExitInput;
    }
}
