// Command-line surface for the valuation toolkit. Every subcommand takes a
// mandatory seed (flag or VALLAB_SEED), runs deterministically, and writes a
// self-describing JSON result (values + stderr + seed + conventions block).
//
// Exit codes: 0 success, 2 malformed config, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vallab/json_io.hpp"
#include "vallab/kinematic.hpp"

namespace {

using vallab::json;

struct Common {
    std::int64_t seed = -1;
    double samples = 100000;
    double inner_samples = 4000;
    int threads = 0;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "RNG seed (mandatory; env VALLAB_SEED as fallback)")
        ->envname("VALLAB_SEED");
    cmd->add_option("--samples", c.samples, "Monte Carlo sample budget")->check(CLI::PositiveNumber);
    cmd->add_option("--inner-samples", c.inner_samples, "budget for nested estimates")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", c.out, "output file (default: stdout)");
}

vallab::MCConfig mc_config(const Common& c) {
    if (c.seed < 0)
        throw std::invalid_argument("a seed is required (--seed or VALLAB_SEED)");
    vallab::MCConfig mc;
    mc.samples = static_cast<std::uint64_t>(c.samples);
    mc.inner_samples = static_cast<std::uint64_t>(c.inner_samples);
    mc.threads = c.threads;
    return mc;
}

vallab::RandomStream stream_of(const Common& c) {
    return vallab::RandomStream(static_cast<std::uint64_t>(c.seed));
}

void emit(json j, const Common& c) {
    j["seed"] = c.seed;
    j["conventions"] = vallab::conventions_json();
    const std::string text = j.dump(2) + "\n";
    if (c.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(c.out);
        if (!f) throw std::invalid_argument("cannot write output file: " + c.out);
        f << text;
    }
}

std::vector<double> parse_radii(const std::vector<double>& flag, int count_if_empty,
                                double start = 0.5, double step = 0.25) {
    if (!flag.empty()) return flag;
    std::vector<double> r;
    for (int i = 0; i < count_if_empty; ++i) r.push_back(start + step * i);
    return r;
}

// --- selftest ---------------------------------------------------------------

int run_selftest(const Common& c) {
    using namespace vallab;
    mc_config(c);  // validates the seed
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok) {
        std::cout << "[selftest] " << name << ": " << (ok ? "pass" : "FAIL") << "\n";
        if (!ok) ++failures;
    };
    const auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

    const ConvexBody ball2 = ConvexBody::ball(Eigen::Vector2d::Zero(), 1.0);
    check("support of the unit disk along e1 is 1",
          near(support(ball2, Eigen::Vector2d(1, 0)), 1.0, 1e-12));
    check("unit disk contains its center and not (2,0)",
          contains(ball2, Eigen::Vector2d::Zero()) && !contains(ball2, Eigen::Vector2d(2, 0)));
    check("unit-ball volumes omega_1, omega_2, omega_3",
          near(unit_ball_volume(1), 2.0, 1e-12) && near(unit_ball_volume(2), M_PI, 1e-12) &&
              near(unit_ball_volume(3), 4 * M_PI / 3, 1e-12));

    const ConvexBody square =
        ConvexBody::axis_box(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1));
    const auto v0 = intrinsic_volume_exact(square, 0);
    const auto v1 = intrinsic_volume_exact(square, 1);
    const auto v2 = intrinsic_volume_exact(square, 2);
    check("exact intrinsic volumes of the unit square are (pi, 2, 1)",
          v0 && v1 && v2 && near(*v0, M_PI, 1e-12) && near(*v1, 2.0, 1e-12) &&
              near(*v2, 1.0, 1e-12));

    check("Steiner coefficients of the unit disk are pi (1, 2, 1)",
          (unit_ball_steiner_coeffs(2) - M_PI * Eigen::Vector3d(1, 2, 1)).norm() < 1e-12);

    const KappaTable k1 = derive_kappa(1, {{0.5, 1.0}, {1.0, 0.5}, {2.0, 1.0}});
    check("kinematic constants on the line are (1/2, 1/2)",
          near(k1.kappa[0], 0.5, 1e-12) && near(k1.kappa[1], 0.5, 1e-12) && k1.residual < 1e-12);

    const int expected_m2[5] = {1, 1, 2, 1, 1};
    bool counts_ok = true;
    for (int k = 0; k <= 4; ++k) counts_ok = counts_ok && hermitian_p_count(k, 2) == expected_m2[k];
    check("Hermitian p-range counts for m = 2 are (1,1,2,1,1)", counts_ok);

    MCConfig mc;
    mc.samples = 2000;
    const ConvexBody box4 =
        ConvexBody::axis_box(Eigen::VectorXd::Zero(4), Eigen::Vector4d(1, 2, 1, 0.5));
    bool u0_ok = true;
    for (int k = 0; k <= 4; ++k) {
        const MCEstimate u = u_kp(box4, 2, k, 0, mc, stream_of(c));
        const auto v = intrinsic_volume_exact(box4, k);
        u0_ok = u0_ok && v && near(u.value, *v, 1e-9) && u.stderror == 0.0;
    }
    check("U_{k,0} equals V_k exactly on a box", u0_ok);

    const GRep two_chi = GRep::chi_only(2.0);
    const MCEstimate chi_val = grep_evaluate(two_chi, square, mc, stream_of(c));
    check("chi-only valuation evaluates exactly", chi_val.value == 2.0 && chi_val.stderror == 0.0);

    const MCEstimate m1 = intrinsic_volume(ball2, 1, mc, stream_of(c));
    const MCEstimate m2 = intrinsic_volume(ball2, 1, mc, stream_of(c));
    check("repeated runs with a fixed seed are bit-identical",
          m1.value == m2.value && m1.stderror == m2.stderror);

    std::cout << "[selftest] " << (failures == 0 ? "all checks passed" : "FAILURES detected")
              << "\n";
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"valuation toolkit: intrinsic volumes, valuation algebra, Hermitian valuations, "
                 "kinematic formulas"};
    app.require_subcommand(1);
    int exit_code = 0;

    // intrinsic --body body.json --i 2 --samples 1e6 --seed 42
    Common c_intr;
    std::string intr_body;
    int intr_i = 0;
    std::string intr_mode = "auto";
    auto* cmd_intr = app.add_subcommand("intrinsic", "intrinsic volume V_i of a body");
    cmd_intr->add_option("--body", intr_body, "body JSON file")->required();
    cmd_intr->add_option("--i", intr_i, "degree i")->required();
    cmd_intr->add_option("--mode", intr_mode, "auto | mc")
        ->check(CLI::IsMember({"auto", "mc"}));
    add_common(cmd_intr, c_intr);
    cmd_intr->callback([&] {
        const vallab::MCConfig mc = mc_config(c_intr);
        const vallab::ConvexBody k = vallab::body_from_json(vallab::load_json_file(intr_body));
        json j;
        j["command"] = "intrinsic";
        j["i"] = intr_i;
        if (intr_mode == "auto") {
            if (const auto exact = vallab::intrinsic_volume_exact(k, intr_i)) {
                j["value"] = *exact;
                j["stderr"] = 0.0;
                j["method"] = "exact";
                emit(j, c_intr);
                return;
            }
        }
        const vallab::MCEstimate e = vallab::intrinsic_volume(k, intr_i, mc, stream_of(c_intr));
        j.update(vallab::estimate_to_json(e));
        j["method"] = "steiner-mc";
        emit(j, c_intr);
    });

    // steiner --body body.json [--radii ...]
    Common c_st;
    std::string st_body;
    std::vector<double> st_radii;
    auto* cmd_st = app.add_subcommand("steiner", "Steiner polynomial coefficients of a body");
    cmd_st->add_option("--body", st_body, "body JSON file")->required();
    cmd_st->add_option("--radii", st_radii, "dilation radii (default: auto)");
    add_common(cmd_st, c_st);
    cmd_st->callback([&] {
        const vallab::MCConfig mc = mc_config(c_st);
        const vallab::ConvexBody k = vallab::body_from_json(vallab::load_json_file(st_body));
        const std::vector<double> radii =
            st_radii.empty() ? vallab::default_steiner_radii(k) : st_radii;
        const vallab::SteinerCoeffs fit = vallab::steiner_fit(
            k, radii, mc, stream_of(c_st), vallab::SteinerVolumeMode::Auto);
        json j;
        j["command"] = "steiner";
        j["radii"] = radii;
        j["coeffs"] = vallab::vector_to_json(fit.coeffs);
        j["coeff_stderr"] = vallab::vector_to_json(fit.coeff_stderr);
        j["residual"] = fit.residual;
        j["condition"] = fit.condition;
        emit(j, c_st);
    });

    // hadwiger --grep phi.json --n 2 [--radii ...]
    Common c_hw;
    std::string hw_grep;
    int hw_n = 0;
    std::vector<double> hw_radii;
    auto* cmd_hw = app.add_subcommand(
        "hadwiger", "decompose a rigid-motion-invariant valuation over the V_i basis");
    cmd_hw->add_option("--grep", hw_grep, "valuation as a GRep JSON file")->required();
    cmd_hw->add_option("--n", hw_n, "ambient dimension")->required()->check(CLI::PositiveNumber);
    cmd_hw->add_option("--radii", hw_radii, "ball probe radii (default: n+3 probes)");
    add_common(cmd_hw, c_hw);
    cmd_hw->callback([&] {
        const vallab::MCConfig mc = mc_config(c_hw);
        const vallab::GRep phi = vallab::grep_from_json(vallab::load_json_file(hw_grep));
        const std::vector<double> radii = parse_radii(hw_radii, hw_n + 3);
        std::uint64_t probe = 0;
        const vallab::RandomStream base = stream_of(c_hw);
        const auto eval = [&](const vallab::ConvexBody& k) {
            return vallab::grep_evaluate(phi, k, mc, base.split(probe++)).value;
        };
        const vallab::HadwigerDecomposition d = vallab::hadwiger_decompose(eval, hw_n, radii);
        json j;
        j["command"] = "hadwiger";
        j["n"] = hw_n;
        j["coefficients"] = vallab::vector_to_json(d.coefficients);
        j["validation_residual"] = d.validation_residual;
        emit(j, c_hw);
    });

    // product --phi a.json --psi b.json --body k.json
    Common c_pr;
    std::string pr_phi, pr_psi, pr_body;
    bool pr_high = false;
    auto* cmd_pr = app.add_subcommand("product", "product of two GRep valuations at a body");
    cmd_pr->add_option("--phi", pr_phi, "first valuation (GRep JSON)")->required();
    cmd_pr->add_option("--psi", pr_psi, "second valuation (GRep JSON)")->required();
    cmd_pr->add_option("--body", pr_body, "evaluation body JSON")->required();
    cmd_pr->add_flag("--allow-high-dim", pr_high, "permit n > 2 (slow)");
    add_common(cmd_pr, c_pr);
    cmd_pr->callback([&] {
        const vallab::MCConfig mc = mc_config(c_pr);
        const vallab::GRep phi = vallab::grep_from_json(vallab::load_json_file(pr_phi));
        const vallab::GRep psi = vallab::grep_from_json(vallab::load_json_file(pr_psi));
        const vallab::ConvexBody k = vallab::body_from_json(vallab::load_json_file(pr_body));
        const vallab::MCEstimate e =
            vallab::alesker_product(phi, psi, k, mc, stream_of(c_pr), pr_high);
        json j = vallab::estimate_to_json(e);
        j["command"] = "product";
        emit(j, c_pr);
    });

    // ukp --body k.json --k 2 --p 1 [--m 2]
    Common c_u;
    std::string u_body;
    int u_k = 0, u_p = 0, u_m = 0;
    auto* cmd_u = app.add_subcommand("ukp", "Hermitian intrinsic volume U_{k,p}");
    cmd_u->add_option("--body", u_body, "body JSON file (in R^{2m})")->required();
    cmd_u->add_option("--k", u_k, "degree k")->required();
    cmd_u->add_option("--p", u_p, "index p")->required();
    cmd_u->add_option("--m", u_m, "complex dimension (default: dim/2)");
    add_common(cmd_u, c_u);
    cmd_u->callback([&] {
        const vallab::MCConfig mc = mc_config(c_u);
        const vallab::ConvexBody k = vallab::body_from_json(vallab::load_json_file(u_body));
        const int m = u_m > 0 ? u_m : k.dim() / 2;
        const vallab::MCEstimate e = vallab::u_kp(k, m, u_k, u_p, mc, stream_of(c_u));
        json j = vallab::estimate_to_json(e);
        j["command"] = "ukp";
        j["m"] = m;
        j["k"] = u_k;
        j["p"] = u_p;
        emit(j, c_u);
    });

    // kinematic {integral | kappa | check}
    auto* cmd_kin = app.add_subcommand("kinematic", "kinematic integrals and formula checks");
    cmd_kin->require_subcommand(1);

    Common c_ki;
    std::string ki_o1, ki_o2, ki_group = "iso";
    auto* cmd_ki = cmd_kin->add_subcommand(
        "integral", "motion integral of chi(Omega1 cap g Omega2) over the group");
    cmd_ki->add_option("--omega1", ki_o1, "first body JSON")->required();
    cmd_ki->add_option("--omega2", ki_o2, "second body JSON")->required();
    cmd_ki->add_option("--group", ki_group, "iso | iu")->check(CLI::IsMember({"iso", "iu"}));
    add_common(cmd_ki, c_ki);
    cmd_ki->callback([&] {
        const vallab::MCConfig mc = mc_config(c_ki);
        const vallab::ConvexBody k1 = vallab::body_from_json(vallab::load_json_file(ki_o1));
        const vallab::ConvexBody k2 = vallab::body_from_json(vallab::load_json_file(ki_o2));
        const auto group = ki_group == "iu" ? vallab::MotionMeasure::Group::IU
                                            : vallab::MotionMeasure::Group::ISO;
        const vallab::MotionMeasure measure = vallab::MotionMeasure::over(group, k1, k2);
        const vallab::MCEstimate e =
            vallab::kinematic_integral(k1, k2, measure, mc, stream_of(c_ki));
        json j = vallab::estimate_to_json(e);
        j["command"] = "kinematic integral";
        j["group"] = ki_group;
        emit(j, c_ki);
    });

    Common c_kk;
    int kk_n = 0;
    auto* cmd_kk = cmd_kin->add_subcommand("kappa", "kinematic constants from the ball system");
    cmd_kk->add_option("--n", kk_n, "ambient dimension")->required()->check(CLI::PositiveNumber);
    add_common(cmd_kk, c_kk);
    cmd_kk->callback([&] {
        mc_config(c_kk);
        std::vector<std::pair<double, double>> pairs;
        for (int q = 0; q <= kk_n + 2; ++q) pairs.push_back({1.0, 0.4 + 0.3 * q});
        const vallab::KappaTable t = vallab::derive_kappa(kk_n, pairs);
        json j;
        j["command"] = "kinematic kappa";
        j["n"] = kk_n;
        j["kappa"] = vallab::vector_to_json(t.kappa);
        j["residual"] = t.residual;
        emit(j, c_kk);
    });

    Common c_kc;
    std::string kc_o1, kc_o2;
    auto* cmd_kc = cmd_kin->add_subcommand(
        "check", "principal kinematic formula: MC integral vs the V_i expansion");
    cmd_kc->add_option("--omega1", kc_o1, "first body JSON")->required();
    cmd_kc->add_option("--omega2", kc_o2, "second body JSON")->required();
    add_common(cmd_kc, c_kc);
    cmd_kc->callback([&] {
        const vallab::MCConfig mc = mc_config(c_kc);
        const vallab::ConvexBody k1 = vallab::body_from_json(vallab::load_json_file(kc_o1));
        const vallab::ConvexBody k2 = vallab::body_from_json(vallab::load_json_file(kc_o2));
        const int n = k1.dim();
        std::vector<std::pair<double, double>> pairs;
        for (int q = 0; q <= n + 2; ++q) pairs.push_back({1.0, 0.4 + 0.3 * q});
        const vallab::KappaTable kappa = vallab::derive_kappa(n, pairs);
        const vallab::KinematicCheck chk =
            vallab::principal_kinematic_check(k1, k2, kappa, mc, stream_of(c_kc));
        json j;
        j["command"] = "kinematic check";
        j["n"] = n;
        j["lhs"] = vallab::estimate_to_json(chk.lhs);
        j["rhs"] = chk.rhs;
        j["rhs_stderr"] = chk.rhs_stderr;
        j["z"] = chk.z;
        j["kappa"] = vallab::vector_to_json(kappa.kappa);
        emit(j, c_kc);
    });

    // fit-hermitian --pairs pairs.json
    Common c_f;
    std::string f_pairs;
    int f_m = 2;
    auto* cmd_f = app.add_subcommand(
        "fit-hermitian", "fit the C^2 kinematic constants from body-pair motion integrals");
    cmd_f->add_option("--pairs", f_pairs,
                      "JSON file {\"train\": [[bodyA, bodyB], ...], \"heldout\": [...]}")
        ->required();
    cmd_f->add_option("--m", f_m, "complex dimension (only 2 supported)");
    add_common(cmd_f, c_f);
    cmd_f->callback([&] {
        const vallab::MCConfig mc = mc_config(c_f);
        const json spec = vallab::load_json_file(f_pairs);
        const auto read_pairs = [&](const char* key) {
            std::vector<std::pair<vallab::ConvexBody, vallab::ConvexBody>> out;
            for (const auto& p : spec.at(key))
                out.emplace_back(vallab::body_from_json(p.at(0)), vallab::body_from_json(p.at(1)));
            return out;
        };
        const vallab::KinematicFit fit = vallab::fit_hermitian_constants(
            f_m, read_pairs("train"), read_pairs("heldout"), mc, stream_of(c_f));
        json j;
        j["command"] = "fit-hermitian";
        j["m"] = f_m;
        j["indices"] = json::array();
        for (const auto& ix : fit.indices)
            j["indices"].push_back({{"k1", ix.k1}, {"k2", ix.k2}, {"p1", ix.p1}, {"p2", ix.p2}});
        j["constants"] = vallab::vector_to_json(fit.constants);
        j["constants_stderr"] = vallab::vector_to_json(fit.constants_stderr);
        j["condition"] = fit.condition;
        j["train_residual_rel"] = vallab::vector_to_json(fit.train_residual_rel);
        j["heldout_residual_rel"] = vallab::vector_to_json(fit.heldout_residual_rel);
        j["symmetry_defect"] = fit.symmetry_defect;
        j["symmetry_scale"] = fit.symmetry_scale;
        emit(j, c_f);
    });

    // selftest --seed 1
    Common c_self;
    auto* cmd_self = app.add_subcommand("selftest", "run the built-in sanity suite");
    add_common(cmd_self, c_self);
    cmd_self->callback([&] { exit_code = run_selftest(c_self); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const vallab::json::exception& e) {
        std::cerr << "error: malformed JSON input: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json diag;
        diag["error"] = "numerical failure";
        diag["detail"] = e.what();
        std::cout << diag.dump(2) << "\n";
        return 3;
    }
    return exit_code;
}
