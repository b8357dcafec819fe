// Acceptance gate: one line per criterion, nonzero exit when any fails.
// argv[1] = path to the CLI binary, argv[2] = bundled scenario directory.

#include "cansys/dynamical.hpp"
#include "cansys/explicit_initial.hpp"
#include "cansys/scenario.hpp"
#include "cansys/string_schrodinger.hpp"
#include "cansys/volterra.hpp"
#include "cansys/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace cansys;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& details) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
                details.c_str());
    if (!pass)
        ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

GBDTSeed seed_71() { return build_seed_scalar(Complex(1.0, 1.0), 1.0, 1.0, 1.0, 0.3); }
GBDTSeed seed_72() { return build_seed_triangular(1.0, 1.0, 1.0, 1.0, 1.0); }

// ---- literal closed forms for the scalar example ---------------------------

struct ScalarRef {
    Complex a, alpha, f1, f2, Q;
    double c;

    Complex e1(double x) const { return std::exp(I1 * x * Q); }
    Complex e2(double x) const { return std::exp(-I1 * x * Q); }

    Matrix aLambda(double x) const {
        Matrix row(1, 2);
        row(0, 0) = std::exp(I1 * c * x) * a * (f1 * e1(x) + f2 * e2(x));
        row(0, 1) = std::exp(-I1 * c * x) * alpha *
            ((a + c + Q) * f1 * e1(x) + (a + c - Q) * f2 * e2(x));
        return row;
    }

    double S(double x) const {
        const double t1 = std::norm(f1 * e1(x) + f2 * e2(x));
        const double t2 = std::norm((a + c + Q) * f1 * e1(x) + (a + c - Q) * f2 * e2(x)) /
                          std::norm(a);
        return (I1 / (a - std::conj(a)) * (t1 - t2)).real();
    }

    Matrix beta(double x) const {
        Matrix b(1, 2);
        b(0, 0) = std::exp(I1 * c * x);
        b(0, 1) = std::exp(-I1 * c * x) * alpha;
        return b;
    }

    Matrix beta_tilde(double x) const {
        const Complex ec1 = std::exp(-I1 * x * std::conj(Q));
        const Complex ec2 = std::exp(I1 * x * std::conj(Q));
        const Complex t1 = std::conj(a) * (std::conj(f1) * ec1 + std::conj(f2) * ec2);
        const Complex t2 =
            std::conj((a + c + Q) * f1) * ec1 + std::conj((a + c - Q) * f2) * ec2;
        const Complex pref = t1 - std::conj(alpha) * t2;
        return beta(x) - I1 / (a * std::norm(a) * S(x)) * pref * aLambda(x);
    }

    Matrix v_literal(double x, Complex lam) const {
        const Matrix aL = aLambda(x);
        Matrix jm(2, 2);
        jm << 1.0, 0.0, 0.0, -1.0;
        return Matrix::Identity(2, 2) -
               I1 * lam / (std::conj(a) * std::norm(a) * (a - lam) * S(x)) *
                   (jm * aL.adjoint() * aL);
    }

    Complex phi_closed(Complex lam) const {
        Complex z1 = std::sqrt(c * (2.0 * lam + c));
        if (z1.imag() < 0.0) z1 = -z1;
        const double S0 = S(0.0);
        const Complex h = alpha * ((a + c + Q) * f1 + (a + c - Q) * f2) * (lam + c - z1) -
                          alpha * a * (f1 + f2) * lam;
        const Complex psi1 =
            std::conj(a) * std::norm(a) * S0 * (a - lam) * (lam + c - z1) +
            I1 * std::conj(alpha) *
                (std::conj((a + c + Q) * f1) + std::conj((a + c - Q) * f2)) * lam * h;
        const Complex psi2 = alpha * std::conj(a) * std::norm(a) * S0 * (lam - a) * lam -
                             I1 * std::conj(a) * std::conj(f1 + f2) * lam * h;
        return psi1 / psi2;
    }
};

ScalarRef ref_for(const GBDTSeed& s) {
    ScalarRef r;
    r.a = s.A(0, 0);
    r.alpha = s.alpha(0, 0);
    r.f1 = s.f1(0, 0);
    r.f2 = s.f2(0, 0);
    r.Q = s.Q(0, 0);
    r.c = s.c;
    return r;
}

// Cubic-in-x closed form of S for the triangular example, coefficients taken
// from the affine column Lambda j beta* = [C1 x + C2, C3].
Matrix S_cubic_literal(const GBDTTransform& T, double x) {
    const Matrix jm = T.seed().signature().j();
    const auto col = [&](double t) { return Matrix(T.Lambda(t) * jm * T.beta(t).adjoint()); };
    const Matrix c0 = col(0.0);
    const Matrix c1 = col(1.0);
    const Complex C2 = c0(0, 0);
    const Complex C1 = c1(0, 0) - C2;
    const Complex C3 = c0(1, 0);

    Matrix add(2, 2);
    add(0, 0) = std::norm(C1) * x * x * x / 3.0 +
                (C1 * std::conj(C2)).real() * x * x + std::norm(C2) * x;
    add(0, 1) = C1 * std::conj(C3) * x * x / 2.0 + C2 * std::conj(C3) * x;
    add(1, 0) = std::conj(add(0, 1));
    add(1, 1) = std::norm(C3) * x;
    return T.seed().S0 + add;
}

Matrix beta_tilde_literal_72(const GBDTTransform& T, double x) {
    const Matrix jm = T.seed().signature().j();
    const auto col = [&](double t) { return Matrix(T.Lambda(t) * jm * T.beta(t).adjoint()); };
    const Matrix c0 = col(0.0);
    const Matrix c1 = col(1.0);
    const Complex C2 = c0(0, 0);
    const Complex C1 = c1(0, 0) - C2;
    const Complex C3 = c0(1, 0);

    Matrix row(1, 2);
    row(0, 0) = std::conj(C1) * x + std::conj(C2);
    row(0, 1) = std::conj(C3);
    return T.beta(x) -
           I1 * row * T.S(x).inverse() * T.seed().A.inverse() * T.Lambda(x);
}

// ---- CLI spawning for criterion 10 ------------------------------------------

namespace fs = std::filesystem;

std::string g_cli, g_scenarios;

int spawn(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + g_cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- criteria ---------------------------------------------------------------

void criterion_1() {
    const Grid grid(0.0, 2.0, 2001);
    double worst = 0.0;
    for (int which : {0, 1}) {
        const GBDTSeed s = which == 0 ? seed_71() : seed_72();
        const GBDTTransform T(s);
        const GBDTState st = make_state(s, grid, T.s_route());
        worst = std::max(worst, gram_identity_residual(s, st));
    }
    report(1, worst <= 1e-8, "seed identity residual " + fmt(worst) +
                                 " <= 1e-08 * (1 + |S|) at 2001 nodes, both examples");
}

void criterion_2() {
    const Grid grid(0.0, 2.0, 2001);
    bool pass = true;
    std::string detail;

    // S: quadrature route against the literal closed forms.
    {
        const GBDTSeed s1 = seed_71();
        const ScalarRef r1 = ref_for(s1);
        const SampledMatrixFunction L1 = eigenfunction_explicit(s1, grid);
        const SampledMatrixFunction Sq1 = recover_S(s1, L1, SRoute::quadrature);
        double e = 0.0;
        for (int i = 0; i < grid.nodes; ++i)
            e = std::max(e, std::abs(Sq1[i](0, 0).real() - r1.S(grid.node(i))));

        const GBDTSeed s2 = seed_72();
        const GBDTTransform T2(s2);
        const SampledMatrixFunction L2 = eigenfunction_explicit(s2, grid);
        const SampledMatrixFunction Sq2 = recover_S(s2, L2, SRoute::quadrature);
        for (int i = 0; i < grid.nodes; ++i)
            e = std::max(e, max_abs(Matrix(Sq2[i] - S_cubic_literal(T2, grid.node(i)))));
        pass = pass && e <= 1e-7;
        detail += "S=" + fmt(e);
    }

    // beta_tilde against the printed displays.
    {
        const GBDTTransform T1(seed_71());
        const ScalarRef r1 = ref_for(T1.seed());
        const GBDTTransform T2(seed_72());
        double e = 0.0;
        for (double x : {0.1, 0.5, 0.9, 1.4, 2.0}) {
            e = std::max(e, max_abs(Matrix(T1.beta_tilde(x) - r1.beta_tilde(x))));
            e = std::max(e, max_abs(Matrix(T2.beta_tilde(x) - beta_tilde_literal_72(T2, x))));
        }
        pass = pass && e <= 1e-7;
        detail += " beta~=" + fmt(e);
    }

    // v against its closed form. lambda = 1+1i equals the eigenvalue of A in
    // the scalar example, where the resolvent (and the printed formula) is
    // undefined; that point is checked on the triangular example instead.
    {
        const GBDTTransform T1(seed_71());
        const ScalarRef r1 = ref_for(T1.seed());
        double e = 0.0;
        for (Complex lam : {Complex(0.0, 1.0), Complex(-0.5, 2.0)})
            for (double x : {0.3, 1.0, 1.7})
                e = std::max(e, max_abs(Matrix(T1.v(x, lam) - r1.v_literal(x, lam))));

        const GBDTTransform T2(seed_72());
        for (Complex lam : {Complex(0.0, 1.0), Complex(1.0, 1.0), Complex(-0.5, 2.0)})
            for (double x : {0.3, 1.0, 1.7}) {
                const Matrix expected = T2.wA(x, 0.0).partialPivLu().solve(T2.wA(x, lam));
                e = std::max(e, max_abs(Matrix(T2.v(x, lam) - expected)));
            }
        pass = pass && e <= 1e-9;
        detail += " v=" + fmt(e);
    }

    // Weyl function: engine (quotient definition, adjugate-scaled) against the
    // rational display, on the positive-S(0) weight order at all three points
    // including lambda inside spec(A).
    {
        const GBDTSeed sw = build_seed_scalar(Complex(1.0, 1.0), 1.0, 1.0, 0.3, 1.0);
        const GBDTTransform Tw(sw);
        const ScalarRef rw = ref_for(sw);
        double e = 0.0;
        for (Complex lam : {Complex(0.0, 1.0), Complex(1.0, 1.0), Complex(-0.5, 2.0)})
            e = std::max(e, std::abs(weyl_function_explicit(Tw, lam)(0, 0) -
                                     rw.phi_closed(lam)));

        // Same identity on the criterion seed, via the quotient form where the
        // resolvent exists.
        const GBDTSeed s1 = seed_71();
        const GBDTTransform T1(s1);
        const ScalarRef r1 = ref_for(s1);
        for (Complex lam : {Complex(0.0, 1.0), Complex(-0.5, 2.0)}) {
            const Matrix E = make_initial_params(1, s1.c, s1.alpha, lam).E1();
            const Matrix M = T1.v(0.0, lam) * E;
            e = std::max(e, std::abs(M(1, 0) / M(0, 0) - r1.phi_closed(lam)));
        }
        pass = pass && e <= 1e-9;
        detail += " phi=" + fmt(e);
    }

    report(2, pass, detail + "  (S,beta~ <= 1e-07; v,phi <= 1e-09)");
}

void criterion_3() {
    double worst = 0.0;
    const Matrix swap = (Matrix(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    for (double c : {1.0, 0.5}) {
        std::vector<Matrix> alphas{Matrix::Identity(1, 1), Matrix::Identity(2, 2), swap};
        for (const Matrix& alpha : alphas) {
            const int p = static_cast<int>(alpha.rows());
            const CanonicalSystemSpec spec = make_beta_exponential(c, 0.0, alpha);
            for (Complex lam : {Complex(0.0, 1.0), Complex(1.0, 2.0), Complex(-0.5, 1.0)}) {
                const SampledMatrixFunction W =
                    fundamental_solution_oracle(spec, lam, Grid(0.0, 1.0, 1001));
                const Matrix Wx = initial_W(p, c, alpha, lam, 1.0);
                worst = std::max(worst, max_abs(Matrix(Wx - W[1000])));
            }
        }
    }
    report(3, worst <= 1e-6,
           "explicit W vs RK4(step 1e-3) " + fmt(worst) +
               " <= 1e-06 over c in {1, 1/2}, p in {1, 2}, three lambda");
}

void criterion_4() {
    double ode = 0.0, orc = 0.0;
    const double h = 1e-4;
    for (int which : {0, 1}) {
        const GBDTTransform T(which == 0 ? seed_71() : seed_72());
        const Matrix jm = T.seed().signature().j();
        for (Complex lam : {Complex(0.0, 1.0), Complex(0.0, 2.0), Complex(-0.5, 2.0)}) {
            for (double x : {0.3, 0.7, 1.3, 1.9}) {
                const Matrix dW = (T.W_tilde(x + h, lam) - T.W_tilde(x - h, lam)) / (2.0 * h);
                const Matrix rhs = I1 * lam * jm * T.H_tilde(x) * T.W_tilde(x, lam);
                ode = std::max(ode, max_abs(Matrix(dW - rhs)));
            }
            const SampledMatrixFunction Wrk =
                fundamental_solution_oracle(T.transformed_system(), lam, Grid(0.0, 1.0, 1001));
            orc = std::max(orc, max_abs(Matrix(T.W_tilde(1.0, lam) - Wrk[1000])));
        }
    }
    report(4, ode <= 1e-5 && orc <= 1e-5,
           "W~ ODE residual " + fmt(ode) + ", vs oracle(H~) at x=1 " + fmt(orc) +
               "  (both <= 1e-05)");
}

void criterion_5() {
    const Grid grid(0.0, 2.0, 2001);
    double iso = 0.0;
    for (int which : {0, 1}) {
        const GBDTTransform T(which == 0 ? seed_71() : seed_72());
        const Matrix jm = T.seed().signature().j();
        for (int i = 0; i < grid.nodes; ++i) {
            const Matrix bt = T.beta_tilde(grid.node(i));
            iso = std::max(iso, max_abs(Matrix(bt * jm * bt.adjoint())));
        }
    }

    // Half-frequency variant: the first-derivative normalization survives.
    const GBDTTransform Th(build_seed_scalar(Complex(1.0, 1.0), 0.5, 1.0, 1.0, 0.3));
    const Matrix jm = Th.seed().signature().j();
    const double h = 1e-4;
    double norm1 = 0.0;
    for (double x : {0.3, 0.9, 1.6}) {
        const Matrix db = (Th.beta_tilde(x + h) - Th.beta_tilde(x - h)) / (2.0 * h);
        norm1 = std::max(norm1,
                         max_abs(Matrix(db * jm * Th.beta_tilde(x).adjoint() -
                                        I1 * Matrix::Identity(1, 1))));
    }
    report(5, iso <= 1e-10 && norm1 <= 1e-6,
           "beta~ j beta~* " + fmt(iso) + " <= 1e-10 at every node; c=1/2 derivative "
           "normalization " + fmt(norm1) + " <= 1e-06");
}

void criterion_6() {
    const GBDTSeed s = build_seed_scalar(Complex(1.0, 1.0), 1.0, 1.0, 0.3, 1.0);
    const GBDTTransform T(s);
    const Complex lam(0.0, 1.0);
    const Matrix phi = weyl_function_explicit(T, lam);

    double min_membership = 1e300;
    double monotone_gap = -1e300;
    double prev_l = 1e300, prev_r = 1e300;
    for (double r : {0.5, 1.0, 2.0, 5.0}) {
        const WeylDisk disk = weyl_disk(T.W_tilde(r, lam), r, lam, s.signature());
        min_membership = std::min(min_membership, disk_membership(disk, phi));
        const double rl = disk.rhoL(0, 0).real();
        const double rr = disk.rhoR(0, 0).real();
        monotone_gap = std::max({monotone_gap, rl - prev_l, rr - prev_r});
        prev_l = rl;
        prev_r = rr;
    }

    double l2_excess = -1e300;
    const double bound = 1.0 / (2.0 * lam.imag());
    for (double L : {1.0, 2.0, 4.0})
        l2_excess = std::max(l2_excess, l2_integral(T, phi, lam, L)(0, 0).real() - bound);

    report(6, min_membership >= -1e-8 && monotone_gap <= 1e-8 && l2_excess <= 1e-6,
           "membership >= " + fmt(min_membership) + " (>= -1e-08), semi-radius growth " +
               fmt(monotone_gap) + " (<= 1e-08), L2 excess " + fmt(l2_excess) +
               " (<= 1e-06)");
}

void criterion_7() {
    const BetaFamily fam = make_exponential_family(0.5, Matrix::Identity(1, 1));
    const CanonicalSystemSpec spec = to_canonical(fam);

    const auto build = [&](int nodes) {
        const VolterraAuxiliaries aux = build_auxiliaries(fam, Grid(0.0, 1.0, nodes));
        const SimilarityKernel ker = kernel_series(aux, 20, 1e-10);
        return std::make_pair(build_discrete(aux, ker), ker);
    };
    const auto [ops400, ker400] = build(400);
    const auto [ops800, ker800] = build(800);

    double err400 = 0.0, ratio_min = 1e300;
    for (Complex lam : {Complex(0.0, 1.0), Complex(0.0, 2.0)}) {
        const SampledMatrixFunction W =
            fundamental_solution_oracle(spec, lam, Grid(0.0, 1.0, 10001));
        const double e400 =
            max_abs(Matrix(transfer_function_wA_ell(ops400, 1.0 / lam) - W[10000]));
        const double e800 =
            max_abs(Matrix(transfer_function_wA_ell(ops800, 1.0 / lam) - W[10000]));
        err400 = std::max(err400, e400);
        ratio_min = std::min(ratio_min, e400 / e800);
    }
    const bool tail_ok = ker400.tail_reached && ker400.tail_bound < 1e-8 &&
                         ker800.tail_reached && ker800.tail_bound < 1e-8;
    const int terms = std::max(ker400.terms_used, ker800.terms_used);
    report(7, err400 <= 5e-3 && ratio_min >= 3.0 && tail_ok && terms <= 12,
           "|W - w_A| " + fmt(err400) + " <= 5e-03, refinement ratio " + fmt(ratio_min) +
               " >= 3, tail < 1e-08 with " + std::to_string(terms) + " terms (<= 12)");
}

void criterion_8() {
    const auto u = [](double) { return Matrix::Constant(1, 1, Complex(-0.25)); };
    const Grid grid(0.0, 2.0, 801);
    const SchrodingerData data = schrodinger_frame(u, 1, grid);

    Matrix J(2, 2), J1(2, 2);
    J << 0.0, 1.0, 1.0, 0.0;
    J1 << 0.0, -I1, I1, 0.0;
    double frame = 0.0;
    for (int i = 0; i < grid.nodes; ++i) {
        const Matrix B = data.B(grid.node(i));
        frame = std::max(frame, max_abs(Matrix(B * J * B.adjoint() - J1)));
    }

    const double schrod = verify_schrodinger_solution(data, Complex(0.0, 1.0), grid);

    const StringData sd = make_string_data(data.vartheta, 1, grid);
    double kappa_gap = 0.0;
    for (int i = 0; i < grid.nodes; ++i) {
        const double x = grid.node(i);
        if (x > sd.valid_end)
            break;
        const Matrix k = sd.kappa(x);
        kappa_gap = std::max(kappa_gap, max_abs(Matrix(k - k.adjoint())));
    }

    report(8, frame <= 1e-9 && schrod <= 1e-4 && kappa_gap <= 1e-10,
           "B J B* - J1 " + fmt(frame) + " <= 1e-09, Schrodinger residual " + fmt(schrod) +
               " <= 1e-04, kappa self-adjointness " + fmt(kappa_gap) + " <= 1e-10");
}

void criterion_9() {
    const std::vector<double> xs{0.5, 1.0};
    const std::vector<double> ts{0.3, 0.8};
    double worst_order_gap = 0.0, ident = 0.0;
    for (int which : {0, 1}) {
        const GBDTTransform T(which == 0 ? seed_71() : seed_72());
        const PdeResidualReport rep = verify_dynamical_pde(dynamical_solution(T), xs, ts);
        worst_order_gap = std::max(worst_order_gap, std::abs(rep.order - 2.0));
        ident = std::max(ident, simplification_identity_residual(T));
    }
    report(9, worst_order_gap <= 0.3 && ident <= 1e-9,
           "PDE order within 2 +- " + fmt(worst_order_gap) +
               " (<= 0.3), row reduction identity " + fmt(ident) + " <= 1e-09");
}

void criterion_10() {
    const fs::path base = fs::temp_directory_path() / "cansys_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    bool pass = true;
    std::string detail;

    // Byte-identical reports for an identical scenario.
    const fs::path d1 = base / "r1", d2 = base / "r2";
    fs::create_directories(d1);
    fs::create_directories(d2);
    const std::string common =
        "run example_7_1 --scenario-dir \"" + g_scenarios + "\" --out \"";
    const int rc1 = spawn(common + d1.string() + "\"", base / "run1.log");
    const int rc2 = spawn(common + d2.string() + "\"", base / "run2.log");
    const std::string rep1 = slurp(d1 / "example_7_1_report.json");
    const std::string rep2 = slurp(d2 / "example_7_1_report.json");
    const bool identical = rc1 == 0 && rc2 == 0 && !rep1.empty() && rep1 == rep2;
    pass = pass && identical;
    detail += std::string("byte-identical=") + (identical ? "yes" : "NO");

    // Exit codes: 0 covered above; 2 parse, 3 precondition, 1 failed checks.
    const fs::path broken = base / "broken.scn";
    std::ofstream(broken) << "[seed]\nkind = scalar\nbogus = 1\n";
    const int parse_rc = spawn("run \"" + broken.string() + "\"", base / "parse.log");

    const int missing_rc =
        spawn("run nope --scenario-dir \"" + g_scenarios + "\"", base / "missing.log");

    const fs::path precond = base / "precond.scn";
    std::ofstream(precond) << "[seed]\nkind = scalar\na = 1+1i\nc = 1\nalpha = 1\n"
                              "f1 = 1\nf2 = 0.3\n[grid]\nlength = 1\nnodes = 301\n"
                              "[lambda]\nvalues = i\n[stages]\nrun = weyl\n";
    const int precond_rc = spawn("run \"" + precond.string() + "\" --out \"" +
                                     (base / "p").string() + "\"",
                                 base / "precond.log");

    const int red_rc = spawn("run example_7_1 --nodes 301 --tol-scale 1e-12 "
                             "--scenario-dir \"" + g_scenarios + "\" --out \"" +
                                 (base / "red").string() + "\"",
                             base / "red.log");

    const bool codes_ok =
        parse_rc == 2 && missing_rc == 2 && precond_rc == 3 && red_rc == 1;
    pass = pass && codes_ok;
    detail += ", exit codes [parse=" + std::to_string(parse_rc) +
              " missing=" + std::to_string(missing_rc) +
              " precondition=" + std::to_string(precond_rc) +
              " failed-checks=" + std::to_string(red_rc) + "] want [2 2 3 1]";

    report(10, pass, detail);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <cansys_cli binary> <scenario dir>\n", argv[0]);
        return 2;
    }
    g_cli = argv[1];
    g_scenarios = argv[2];

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();

    if (g_failures == 0)
        std::printf("acceptance: all 10 criteria PASS\n");
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
