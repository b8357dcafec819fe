#include "cansys/scenario.hpp"

#include "cansys/dynamical.hpp"
#include "cansys/explicit_initial.hpp"
#include "cansys/gbdt.hpp"
#include "cansys/string_schrodinger.hpp"
#include "cansys/volterra.hpp"
#include "cansys/weyl.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace cansys {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

double parse_double_strict(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw ScenarioParseError("bad number for " + what + ": '" + s + "'");
    return v;
}

int parse_int_strict(const std::string& s, const std::string& what) {
    const double v = parse_double_strict(s, what);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ScenarioParseError("expected an integer for " + what + ": '" + s + "'");
    return i;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

Complex parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s.empty())
        throw ScenarioParseError("empty complex literal");

    size_t split = std::string::npos;
    for (size_t k = 1; k < s.size(); ++k) {
        const char c = s[k];
        if ((c == '+' || c == '-') && s[k - 1] != 'e' && s[k - 1] != 'E')
            split = k;
    }

    const auto as_real = [&](const std::string& part, const char* what) {
        return parse_double_strict(part, std::string("complex literal ") + what);
    };

    if (!s.empty() && s.back() == 'i') {
        std::string re = "0", im;
        if (split == std::string::npos) {
            im = s.substr(0, s.size() - 1);
        } else {
            re = s.substr(0, split);
            im = s.substr(split, s.size() - split - 1);
        }
        if (im.empty() || im == "+")
            im = "1";
        else if (im == "-")
            im = "-1";
        return Complex(as_real(re, "real part"), as_real(im, "imaginary part"));
    }
    if (split != std::string::npos)
        throw ScenarioParseError("malformed complex literal '" + text + "'");
    return Complex(as_real(s, "value"), 0.0);
}

std::string format_complex(Complex z) {
    const double re = z.real(), im = z.imag();
    if (im == 0.0)
        return fmt_short(re);
    std::string ip;
    if (im == 1.0)
        ip = "i";
    else if (im == -1.0)
        ip = "-i";
    else
        ip = fmt_short(im) + "i";
    if (re == 0.0)
        return ip;
    return fmt_short(re) + (im > 0.0 ? "+" : "") + ip;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

const std::vector<std::string> kStageOrder = {"build",    "transform", "verify", "weyl",
                                              "dynamical", "volterra", "string"};

std::vector<std::string> normalize_stages(std::vector<std::string> wanted) {
    for (const auto& s : wanted)
        if (std::find(kStageOrder.begin(), kStageOrder.end(), s) == kStageOrder.end())
            throw ScenarioParseError("unknown stage '" + s + "'");
    const auto want = [&](const std::string& s) {
        return std::find(wanted.begin(), wanted.end(), s) != wanted.end();
    };
    // Auto-insert prerequisites: everything seed-based needs build; the
    // grid-level stages need the transform.
    if (want("transform") || want("verify") || want("weyl") || want("dynamical")) {
        if (!want("build"))
            wanted.push_back("build");
        if (!want("transform"))
            wanted.push_back("transform");
    }
    std::vector<std::string> out;
    for (const auto& s : kStageOrder)
        if (want(s))
            out.push_back(s);
    return out;
}

} // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& fallback_name) {
    Scenario sc;
    sc.raw = text;
    sc.name = fallback_name;

    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    bool saw_seed = false;
    std::vector<std::string> stage_list;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::string where = " (line " + std::to_string(lineno) + ")";

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ScenarioParseError("unterminated section header" + where);
            section = trim(line.substr(1, line.size() - 2));
            static const std::vector<std::string> known = {
                "seed", "grid", "lambda", "stages", "weyl", "volterra",
                "string", "series", "tolerances"};
            if (std::find(known.begin(), known.end(), section) == known.end())
                throw ScenarioParseError("unknown section [" + section + "]" + where);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioParseError("expected key = value" + where);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (section.empty()) {
            if (key == "name")
                sc.name = val;
            else
                throw ScenarioParseError("unknown top-level key '" + key + "'" + where);
        } else if (section == "seed") {
            saw_seed = true;
            if (key == "kind")
                sc.seed.kind = val;
            else if (key == "a")
                sc.seed.a = parse_complex(val);
            else if (key == "c")
                sc.seed.c = parse_double_strict(val, "seed.c");
            else if (key == "alpha")
                sc.seed.alpha = parse_complex(val);
            else if (key == "f1")
                sc.seed.f1 = parse_complex(val);
            else if (key == "f2")
                sc.seed.f2 = parse_complex(val);
            else if (key == "xi")
                sc.seed.xi = parse_double_strict(val, "seed.xi");
            else if (key == "q")
                sc.seed.q = parse_complex(val);
            else if (key == "f")
                sc.seed.f = parse_complex(val);
            else if (key == "g")
                sc.seed.g = parse_complex(val);
            else
                throw ScenarioParseError("unknown seed key '" + key + "'" + where);
        } else if (section == "grid") {
            if (key == "length")
                sc.length = parse_double_strict(val, "grid.length");
            else if (key == "nodes")
                sc.nodes = parse_int_strict(val, "grid.nodes");
            else
                throw ScenarioParseError("unknown grid key '" + key + "'" + where);
        } else if (section == "lambda") {
            if (key == "values") {
                sc.lambdas.clear();
                for (const auto& item : split_list(val))
                    sc.lambdas.push_back(parse_complex(item));
            } else if (key == "line_im") {
                sc.has_lambda_line = true;
                sc.lambda_line.im = parse_double_strict(val, "lambda.line_im");
            } else if (key == "line_re_start") {
                sc.has_lambda_line = true;
                sc.lambda_line.re_start = parse_double_strict(val, "lambda.line_re_start");
            } else if (key == "line_re_end") {
                sc.has_lambda_line = true;
                sc.lambda_line.re_end = parse_double_strict(val, "lambda.line_re_end");
            } else if (key == "line_count") {
                sc.has_lambda_line = true;
                sc.lambda_line.count = parse_int_strict(val, "lambda.line_count");
            } else {
                throw ScenarioParseError("unknown lambda key '" + key + "'" + where);
            }
        } else if (section == "stages") {
            if (key == "run")
                stage_list = split_list(val);
            else
                throw ScenarioParseError("unknown stages key '" + key + "'" + where);
        } else if (section == "weyl") {
            if (key == "radii") {
                sc.weyl.radii.clear();
                for (const auto& item : split_list(val))
                    sc.weyl.radii.push_back(parse_double_strict(item, "weyl.radii"));
            } else if (key == "l2_lengths") {
                sc.weyl.l2_lengths.clear();
                for (const auto& item : split_list(val))
                    sc.weyl.l2_lengths.push_back(parse_double_strict(item, "weyl.l2_lengths"));
            } else {
                throw ScenarioParseError("unknown weyl key '" + key + "'" + where);
            }
        } else if (section == "volterra") {
            if (key == "c")
                sc.volterra.c = parse_double_strict(val, "volterra.c");
            else if (key == "length")
                sc.volterra.length = parse_double_strict(val, "volterra.length");
            else if (key == "nodes")
                sc.volterra.nodes = parse_int_strict(val, "volterra.nodes");
            else if (key == "kmax")
                sc.volterra.kmax = parse_int_strict(val, "volterra.kmax");
            else if (key == "tol")
                sc.volterra.tol = parse_double_strict(val, "volterra.tol");
            else if (key == "lambda") {
                sc.volterra.lambdas.clear();
                for (const auto& item : split_list(val))
                    sc.volterra.lambdas.push_back(parse_complex(item));
            } else {
                throw ScenarioParseError("unknown volterra key '" + key + "'" + where);
            }
        } else if (section == "string") {
            if (key == "u")
                sc.string_cfg.u = parse_double_strict(val, "string.u");
            else if (key == "length")
                sc.string_cfg.length = parse_double_strict(val, "string.length");
            else if (key == "nodes")
                sc.string_cfg.nodes = parse_int_strict(val, "string.nodes");
            else
                throw ScenarioParseError("unknown string key '" + key + "'" + where);
        } else if (section == "series") {
            if (key == "emit")
                sc.emit = split_list(val);
            else if (key == "nodes")
                sc.emit_nodes = parse_int_strict(val, "series.nodes");
            else
                throw ScenarioParseError("unknown series key '" + key + "'" + where);
        } else if (section == "tolerances") {
            sc.tolerance_overrides[key] = parse_double_strict(val, "tolerances." + key);
        }
    }

    if (stage_list.empty())
        throw ScenarioParseError("scenario must list at least one stage under [stages] run =");
    sc.stages = normalize_stages(stage_list);

    const bool needs_seed = std::find(sc.stages.begin(), sc.stages.end(), "build") != sc.stages.end();
    if (needs_seed) {
        if (!saw_seed)
            throw ScenarioParseError("scenario runs seed stages but has no [seed] section");
        if (sc.seed.kind != "scalar" && sc.seed.kind != "triangular")
            throw ScenarioParseError("seed.kind must be 'scalar' or 'triangular', got '" +
                                     sc.seed.kind + "'");
        if (sc.lambdas.empty())
            throw ScenarioParseError("scenario needs [lambda] values for the seed stages");
    }
    if (sc.nodes < 2)
        throw ScenarioParseError("grid.nodes must be at least 2");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ScenarioParseError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string stem = std::filesystem::path(path).stem().string();
    return parse_scenario_text(buf.str(), stem);
}

std::map<std::string, double> default_tolerances() {
    return {
        {"seed_identity", 1e-10},
        {"s0_hermitian", 1e-12},
        {"gram_identity", 1e-8},
        {"beta_isotropy", 1e-10},
        {"beta_normalization", 1e-6},
        {"wtilde_ode", 1e-5},
        {"wtilde_oracle", 1e-5},
        {"s_routes_match", 1e-7},
        {"eigenfunction_ode", 1e-6},
        {"winit_oracle", 1e-6},
        {"j_monotonicity", 1e-8},
        {"disk_membership", 1e-8},
        {"semiradius_monotone", 1e-8},
        {"l2_bound", 1e-6},
        {"volterra_similarity", 1e-6},
        {"volterra_snode", 1e-8},
        {"volterra_hamiltonian", 1e-10},
        {"volterra_tail_terms", 12.0},
        {"volterra_tail_bound", 1e-8},
        {"volterra_transfer", 5e-3},
        {"string_frame", 1e-9},
        {"schrodinger_residual", 1e-4},
        {"kappa_selfadjoint", 1e-10},
        {"string_equation", 1e-3},
        {"dynamical_order", 0.3},
        {"simplification_identity", 1e-9},
        {"transport_identity", 1e-5},
    };
}

namespace {

GBDTSeed build_configured_seed(const SeedConfig& cfg) {
    if (cfg.kind == "scalar")
        return build_seed_scalar(cfg.a, cfg.c, cfg.alpha, cfg.f1, cfg.f2);
    return build_seed_triangular(cfg.xi, cfg.q, cfg.f, cfg.g, cfg.alpha);
}

struct Runner {
    const Scenario& sc;
    const RunOptions& opt;
    std::map<std::string, double> tol = default_tolerances();
    Report rep;

    GBDTSeed seed;
    std::unique_ptr<GBDTTransform> transform;
    Grid grid;

    Runner(const Scenario& s, const RunOptions& o) : sc(s), opt(o) {
        for (const auto& [k, v] : sc.tolerance_overrides)
            tol[k] = v;
        const int nodes = opt.nodes_override > 0 ? opt.nodes_override : sc.nodes;
        grid = Grid(0.0, sc.length, nodes);
        rep.scenario_name = sc.name;
        rep.scenario_hash = fnv1a64(sc.raw);
        rep.tol_scale = opt.tol_scale;
        rep.nodes = nodes;
    }

    double tol_of(const std::string& key) const {
        const auto it = tol.find(key);
        if (it == tol.end())
            throw std::logic_error("no tolerance registered for " + key);
        return it->second * opt.tol_scale;
    }

    void add_check(const std::string& stage, const std::string& name, const std::string& key,
                   double value) {
        CheckResult c;
        c.stage = stage;
        c.name = name;
        c.value = value;
        c.tolerance = tol_of(key);
        c.pass = value <= c.tolerance;
        rep.checks.push_back(std::move(c));
    }

    void run() {
        for (const auto& stage : sc.stages) {
            rep.stages.push_back(stage);
            if (stage == "build")
                stage_build();
            else if (stage == "transform")
                stage_transform();
            else if (stage == "verify")
                stage_verify();
            else if (stage == "weyl")
                stage_weyl();
            else if (stage == "dynamical")
                stage_dynamical();
            else if (stage == "volterra")
                stage_volterra();
            else if (stage == "string")
                stage_string();
        }
        emit_series();
    }

    void stage_build() {
        seed = build_configured_seed(sc.seed);
        validate_seed(seed);
        const Matrix jm = seed.signature().j();
        const Matrix gap =
            seed.A * seed.S0 - seed.S0 * seed.A.adjoint() - I1 * seed.Lambda0 * jm * seed.Lambda0.adjoint();
        add_check("build", "seed_identity", "seed_identity", frob(gap) / (1.0 + frob(seed.S0)));
        add_check("build", "s0_hermitian", "s0_hermitian",
                  max_abs(Matrix(seed.S0 - seed.S0.adjoint())));
        transform = std::make_unique<GBDTTransform>(seed);
    }

    void stage_transform() {
        const GBDTState state = make_state(seed, grid, transform->s_route());
        add_check("transform", "gram_identity", "gram_identity", gram_identity_residual(seed, state));

        double iso = 0.0;
        const Matrix jm = seed.signature().j();
        for (int i = 0; i < grid.nodes; ++i) {
            const Matrix bt = transform->beta_tilde(grid.node(i));
            iso = std::max(iso, max_abs(Matrix(bt * jm * bt.adjoint())));
        }
        add_check("transform", "beta_isotropy", "beta_isotropy", iso);

        if (sc.seed.kind == "scalar" && sc.seed.c == 0.5) {
            const double h = 1e-4;
            double worst = 0.0;
            for (double x : {0.3, 0.9, 1.6}) {
                const Matrix der =
                    (transform->beta_tilde(x + h) - transform->beta_tilde(x - h)) / (2.0 * h);
                const Matrix r = der * jm * transform->beta_tilde(x).adjoint() -
                                 I1 * Matrix::Identity(seed.m1, seed.m1);
                worst = std::max(worst, max_abs(r));
            }
            add_check("transform", "beta_normalization", "beta_normalization", worst);
        }

        for (Complex lam : sc.lambdas) {
            const std::string tag = "(" + format_complex(lam) + ")";
            const double h = 1e-4;
            double ode = 0.0;
            for (double x : {0.3, 0.7, 1.3}) {
                const Matrix der =
                    (transform->W_tilde(x + h, lam) - transform->W_tilde(x - h, lam)) / (2.0 * h);
                const Matrix r =
                    der - I1 * lam * jm * transform->H_tilde(x) * transform->W_tilde(x, lam);
                ode = std::max(ode, max_abs(r));
            }
            add_check("transform", "wtilde_ode" + tag, "wtilde_ode", ode);

            const Grid fine(0.0, 1.0, 1001);
            const SampledMatrixFunction W =
                fundamental_solution_oracle(transform->transformed_system(), lam, fine);
            const double dev = max_abs(Matrix(transform->W_tilde(1.0, lam) - W[fine.nodes - 1]));
            add_check("transform", "wtilde_oracle" + tag, "wtilde_oracle", dev);
        }
    }

    void stage_verify() {
        const GBDTState quad = make_state(seed, grid, SRoute::quadrature);
        double sdev = 0.0;
        for (int i = 0; i < grid.nodes; ++i)
            sdev = std::max(sdev, max_abs(Matrix(quad.S[i] - transform->S(grid.node(i)))));
        add_check("verify", "s_routes_match", "s_routes_match", sdev);

        const Matrix jm = seed.signature().j();
        const double h = 1e-4;
        double eig = 0.0;
        for (double x : {0.4, 1.1, 1.6}) {
            const Matrix der = (transform->Lambda(x + h) - transform->Lambda(x - h)) / (2.0 * h);
            const Matrix r = der + I1 * seed.A * transform->Lambda(x) * jm * transform->H(x);
            eig = std::max(eig, max_abs(r));
        }
        add_check("verify", "eigenfunction_ode", "eigenfunction_ode", eig);

        const CanonicalSystemSpec sys = seed.system();
        for (Complex lam : sc.lambdas) {
            const std::string tag = "(" + format_complex(lam) + ")";
            const Grid fine(0.0, 1.0, 1001);
            const SampledMatrixFunction W = fundamental_solution_oracle(sys, lam, fine);
            const double dev =
                max_abs(Matrix(transform->W_initial(1.0, lam) - W[fine.nodes - 1]));
            add_check("verify", "winit_oracle" + tag, "winit_oracle", dev);
        }

        for (Complex lam : sc.lambdas) {
            if (lam.imag() <= 0.0)
                continue;
            const Grid span(0.0, sc.length, 501);
            const SampledMatrixFunction W = fundamental_solution_oracle(sys, lam, span);
            const MonotonicityReport mono =
                check_j_monotonicity(W, lam, seed.signature(), tol_of("j_monotonicity"));
            add_check("verify", "j_monotonicity(" + format_complex(lam) + ")", "j_monotonicity",
                      mono.worst_violation);
            break;
        }
    }

    void stage_weyl() {
        if (!seed.s0_positive)
            throw std::invalid_argument("S(0) not positive");
        for (Complex lam : sc.lambdas) {
            if (lam.imag() <= 0.0)
                continue;
            const std::string tag = "(" + format_complex(lam) + ")";
            const Matrix phi = weyl_function_explicit(*transform, lam);

            double member = 0.0;
            std::vector<WeylDisk> disks;
            for (double r : sc.weyl.radii) {
                const WeylDisk disk =
                    weyl_disk(transform->W_tilde(r, lam), r, lam, seed.signature());
                member = std::max(member, std::max(0.0, -disk_membership(disk, phi)));
                disks.push_back(disk);
            }
            add_check("weyl", "disk_membership" + tag, "disk_membership", member);

            const auto opnorm = [](const Matrix& M) {
                Eigen::SelfAdjointEigenSolver<Matrix> es(M);
                return es.eigenvalues().maxCoeff();
            };
            double grow = 0.0;
            for (size_t k = 1; k < disks.size(); ++k) {
                grow = std::max(grow, opnorm(disks[k].rhoL) - opnorm(disks[k - 1].rhoL));
                grow = std::max(grow, opnorm(disks[k].rhoR) - opnorm(disks[k - 1].rhoR));
            }
            add_check("weyl", "semiradius_monotone" + tag, "semiradius_monotone",
                      std::max(0.0, grow));

            double excess = 0.0;
            for (double L : sc.weyl.l2_lengths) {
                const Matrix integral = l2_integral(*transform, phi, lam, L);
                Eigen::SelfAdjointEigenSolver<Matrix> es(integral);
                excess = std::max(excess,
                                  es.eigenvalues().maxCoeff() - 1.0 / (2.0 * lam.imag()));
            }
            add_check("weyl", "l2_bound" + tag, "l2_bound", std::max(0.0, excess));
        }
    }

    void stage_dynamical() {
        const DynamicalSolution sol = dynamical_solution(*transform);
        const PdeResidualReport pde =
            verify_dynamical_pde(sol, {0.5, 1.0}, {0.3, 0.8}, 2e-3);
        add_check("dynamical", "dynamical_order", "dynamical_order",
                  std::abs(pde.order - 2.0));
        add_check("dynamical", "simplification_identity", "simplification_identity",
                  simplification_identity_residual(*transform));
        add_check("dynamical", "transport_identity", "transport_identity",
                  transport_identity_residual(*transform));
    }

    void stage_volterra() {
        const VolterraConfig& cfg = sc.volterra;
        const Grid vgrid(0.0, cfg.length, cfg.nodes);
        const BetaFamily family = make_exponential_family(cfg.c, Matrix::Identity(1, 1));
        const VolterraAuxiliaries aux = build_auxiliaries(family, vgrid);
        const SimilarityKernel kernel =
            kernel_series(aux, cfg.kmax, cfg.tol, ExecutionPolicy::parallel);

        add_check("volterra", "tail_terms", "volterra_tail_terms",
                  static_cast<double>(kernel.terms_used));
        add_check("volterra", "tail_bound", "volterra_tail_bound", kernel.tail_bound);

        const VolterraDiscretization disc = build_discrete(aux, kernel);
        add_check("volterra", "similarity", "volterra_similarity", similarity_residual(disc));
        add_check("volterra", "seed_node_identity", "volterra_snode",
                  snode_identity_residual(disc));
        add_check("volterra", "hamiltonian_recovery", "volterra_hamiltonian",
                  hamiltonian_recovery_residual(disc));

        const CanonicalSystemSpec sys = to_canonical(family);
        for (Complex lam : cfg.lambdas) {
            const Grid fine(0.0, cfg.length, 10001);
            const SampledMatrixFunction W = fundamental_solution_oracle(sys, lam, fine);
            const Matrix w = transfer_function_wA_ell(disc, Complex(1.0) / lam);
            add_check("volterra", "transfer(" + format_complex(lam) + ")", "volterra_transfer",
                      max_abs(Matrix(w - W[fine.nodes - 1])));
        }
    }

    void stage_string() {
        const StringConfig& cfg = sc.string_cfg;
        const Grid sgrid(0.0, cfg.length, cfg.nodes);
        const int p = 1;
        const double uval = cfg.u;
        const auto u = [uval, p](double) { return Matrix(uval * Matrix::Identity(p, p)); };
        const SchrodingerData data = schrodinger_frame(u, p, sgrid);

        const SignatureConfig sig(p, p);
        const Matrix J = sig.J();
        Matrix J1 = Matrix::Zero(2 * p, 2 * p);
        J1.topRightCorner(p, p) = -I1 * Matrix::Identity(p, p);
        J1.bottomLeftCorner(p, p) = I1 * Matrix::Identity(p, p);
        double frame = 0.0;
        for (int i = 0; i < sgrid.nodes; ++i) {
            const Matrix B = data.B(sgrid.node(i));
            frame = std::max(frame, max_abs(Matrix(B * J * B.adjoint() - J1)));
        }
        add_check("string", "frame_invariant", "string_frame", frame);

        double res = 0.0;
        for (Complex lam : sc.lambdas.empty() ? std::vector<Complex>{Complex(0.0, 1.0)}
                                              : sc.lambdas)
            res = std::max(res, verify_schrodinger_solution(data, lam, sgrid));
        add_check("string", "schrodinger_residual", "schrodinger_residual", res);

        const StringData sdata = make_string_data(data.vartheta, p, sgrid);
        double sa = 0.0;
        for (int i = 0; i < sgrid.nodes; ++i) {
            const double x = sgrid.node(i);
            if (x > sdata.valid_end)
                break;
            const Matrix k = sdata.kappa(x);
            sa = std::max(sa, max_abs(Matrix(k - k.adjoint())));
        }
        add_check("string", "kappa_selfadjoint", "kappa_selfadjoint", sa);

        const Complex lam0 = sc.lambdas.empty() ? Complex(0.0, 1.0) : sc.lambdas.front();
        const SampledMatrixFunction W =
            fundamental_solution_oracle(schrodinger_to_canonical(data), lam0, sgrid);
        add_check("string", "string_equation", "string_equation",
                  string_equation_residual(sdata, W, lam0));
    }

    // ---- series -------------------------------------------------------
    void sample_matrix_series(const std::string& name,
                              const std::function<Matrix(double)>& f) {
        const Grid egrid(0.0, sc.length, sc.emit_nodes);
        const Matrix probe = f(egrid.start);
        SeriesData s;
        s.name = name;
        s.columns.push_back("x");
        for (int r = 0; r < probe.rows(); ++r)
            for (int c = 0; c < probe.cols(); ++c) {
                const std::string e =
                    name + "_" + std::to_string(r + 1) + std::to_string(c + 1);
                s.columns.push_back("Re(" + e + ")");
                s.columns.push_back("Im(" + e + ")");
            }
        for (int i = 0; i < egrid.nodes; ++i) {
            const Matrix M = f(egrid.node(i));
            std::vector<double> row;
            row.push_back(egrid.node(i));
            for (int r = 0; r < M.rows(); ++r)
                for (int c = 0; c < M.cols(); ++c) {
                    row.push_back(M(r, c).real());
                    row.push_back(M(r, c).imag());
                }
            s.rows.push_back(std::move(row));
        }
        rep.series.push_back(std::move(s));
    }

    void sample_phi_series() {
        std::vector<Complex> points;
        if (sc.has_lambda_line) {
            const LambdaLine& ln = sc.lambda_line;
            if (ln.count < 2)
                throw ScenarioParseError("lambda.line_count must be at least 2");
            for (int k = 0; k < ln.count; ++k) {
                const double re =
                    ln.re_start + (ln.re_end - ln.re_start) * k / (ln.count - 1);
                points.emplace_back(re, ln.im);
            }
        } else {
            points = sc.lambdas;
        }
        std::vector<Matrix> values(points.size());
#ifdef CANSYS_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int k = 0; k < static_cast<int>(points.size()); ++k)
            values[k] = weyl_function_explicit(*transform, points[k]);

        SeriesData s;
        s.name = "phi";
        s.columns = {"Re(lambda)", "Im(lambda)"};
        const int p = seed.m1;
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) {
                const std::string e =
                    "phi_" + std::to_string(r + 1) + std::to_string(c + 1);
                s.columns.push_back("Re(" + e + ")");
                s.columns.push_back("Im(" + e + ")");
            }
        for (size_t k = 0; k < points.size(); ++k) {
            std::vector<double> row{points[k].real(), points[k].imag()};
            for (int r = 0; r < p; ++r)
                for (int c = 0; c < p; ++c) {
                    row.push_back(values[k](r, c).real());
                    row.push_back(values[k](r, c).imag());
                }
            s.rows.push_back(std::move(row));
        }
        rep.series.push_back(std::move(s));
    }

    void emit_series() {
        const std::vector<std::string>& wanted = opt.emit_override ? opt.emit_list : sc.emit;
        for (const auto& name : wanted) {
            if (name == "H" || name == "H_tilde" || name == "S" || name == "Lambda" ||
                name == "beta_tilde") {
                if (!transform)
                    throw ScenarioParseError("series '" + name +
                                             "' needs the build/transform stages");
                const GBDTTransform& t = *transform;
                if (name == "H")
                    sample_matrix_series(name, [&t](double x) { return t.H(x); });
                else if (name == "H_tilde")
                    sample_matrix_series(name, [&t](double x) { return t.H_tilde(x); });
                else if (name == "S")
                    sample_matrix_series(name, [&t](double x) { return t.S(x); });
                else if (name == "Lambda")
                    sample_matrix_series(name, [&t](double x) { return t.Lambda(x); });
                else
                    sample_matrix_series(name, [&t](double x) { return t.beta_tilde(x); });
            } else if (name == "phi") {
                if (!transform)
                    throw ScenarioParseError("series 'phi' needs the build/transform stages");
                sample_phi_series();
            } else {
                throw ScenarioParseError("unknown series name: " + name);
            }
        }
    }
};

} // namespace

Report run_scenario(const Scenario& scenario, const RunOptions& options) {
    Runner runner(scenario, options);
    runner.run();
    return std::move(runner.rep);
}

bool Report::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

std::string Report::to_json() const {
    nlohmann::ordered_json root;
    root["scenario"] = scenario_name;
    char hash[32];
    std::snprintf(hash, sizeof hash, "fnv1a-%016llx",
                  static_cast<unsigned long long>(scenario_hash));
    root["provenance"] = {{"scenario_hash", hash},
                          {"tol_scale", tol_scale},
                          {"nodes", nodes}};

    root["stages"] = nlohmann::ordered_json::array();
    for (const auto& stage : stages) {
        nlohmann::ordered_json js;
        js["name"] = stage;
        auto arr = nlohmann::ordered_json::array();
        bool ok = true;
        for (const auto& c : checks) {
            if (c.stage != stage)
                continue;
            arr.push_back({{"name", c.name},
                           {"value", c.value},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass}});
            ok = ok && c.pass;
        }
        js["status"] = ok ? "pass" : "fail";
        js["checks"] = std::move(arr);
        root["stages"].push_back(std::move(js));
    }

    root["series"] = nlohmann::ordered_json::array();
    for (const auto& s : series)
        root["series"].push_back({{"name", s.name},
                                  {"file", scenario_name + "_" + s.name + ".csv"},
                                  {"rows", s.rows.size()},
                                  {"columns", s.columns.size()}});

    const size_t failures =
        static_cast<size_t>(std::count_if(checks.begin(), checks.end(),
                                          [](const CheckResult& c) { return !c.pass; }));
    root["summary"] = {{"checks", checks.size()},
                       {"failures", failures},
                       {"status", failures == 0 ? "pass" : "fail"}};
    return root.dump(2) + "\n";
}

std::string render_csv(const SeriesData& series) {
    std::string out;
    for (size_t k = 0; k < series.columns.size(); ++k) {
        if (k)
            out.push_back(',');
        out += series.columns[k];
    }
    out.push_back('\n');
    for (const auto& row : series.rows) {
        for (size_t k = 0; k < row.size(); ++k) {
            if (k)
                out.push_back(',');
            out += fmt_full(row[k]);
        }
        out.push_back('\n');
    }
    return out;
}

namespace {

std::string write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
    return path.string();
}

} // namespace

std::vector<std::string> write_report(const Report& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::vector<std::string> written;
    written.push_back(
        write_text_file(dir / (report.scenario_name + "_report.json"), report.to_json()));
    for (const auto& s : report.series)
        written.push_back(write_text_file(dir / (report.scenario_name + "_" + s.name + ".csv"),
                                          render_csv(s)));
    return written;
}

std::vector<std::string> emit_plot_data(const Report& report,
                                        const std::vector<std::string>& selection,
                                        const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::vector<std::string> written;
    for (const auto& name : selection) {
        const auto it = std::find_if(report.series.begin(), report.series.end(),
                                     [&](const SeriesData& s) { return s.name == name; });
        if (it == report.series.end())
            throw ScenarioParseError("unknown series name: " + name);
        written.push_back(write_text_file(dir / (report.scenario_name + "_" + name + ".csv"),
                                          render_csv(*it)));
    }
    return written;
}

} // namespace cansys
