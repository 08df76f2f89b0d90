// qms: command-line driver for the check suites, certificates, decompositions and geodesics.
//
// Exit codes: 0 all asserted checks pass, 2 an invariant failed (row printed), 1 I/O or config error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "qms/experiment.hpp"

namespace fs = std::filesystem;
using namespace qms;

namespace {

int finish(const Report& rep, const ExperimentConfig& cfg) {
  write_report(rep, cfg);
  for (const Row* r : rep.failures())
    std::fprintf(stderr, "FAIL %s %s worst_slack=%.6e\n", r->instance_id.c_str(), r->check.c_str(), r->worst_slack);
  std::printf("%zu rows, %s; report in %s\n", rep.rows().size(), rep.all_pass() ? "all asserted checks pass" : "FAILURES",
              cfg.output_dir.c_str());
  return rep.all_pass() ? 0 : 2;
}

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec || !fs::is_directory(d)) throw Error(Errc::io_error, "cannot create output directory " + d);
}

DBGenerator demo_generator(const std::string& name, int n) {
  if (name == "depolarizing") return depolarizing_db(n);
  if (name == "thermal") {
    require(n == 2, Errc::invalid_input, "the thermal demo is a qubit; use --n 2");
    return thermal_qubit_db(0.7);
  }
  if (name == "random") return random_db_generator(n, 1);
  throw Error(Errc::invalid_input, "unknown demo \"" + name + "\" (depolarizing, thermal, random)");
}

DBGenerator load_generator(const std::string& in, const std::string& demo, int n) {
  if (!in.empty()) return db_from_json(read_json_file(in));
  require(!demo.empty(), Errc::invalid_input, "give --in FILE or --demo NAME");
  return demo_generator(demo, n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Markov semigroup toolkit"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  int n_opt = 0;
  std::map<std::string, double> tol_flags;

  // run
  auto* run = app.add_subcommand("run", "run check suites and write report.csv / summary.json");
  run->add_option("--suite", cfg.suite, "entropy, channels, monotone, lindblad, transport, convexity or all");
  run->add_option("--n", n_opt, "dimension (default: per-suite ranges)");
  run->add_option("--trials", cfg.trials, "trials per check");
  run->add_option("--seed", cfg.seed, "random seed");
  run->add_option("--out", cfg.output_dir, "output directory");
  for (const auto& [k, v] : cfg.tol.values) {
    std::string flag = "--tol-" + k;
    for (auto& ch : flag)
      if (ch == '_') ch = '-';
    run->add_option(flag, tol_flags[k], "tolerance override (default " + std::to_string(v) + ")");
  }

  // certify
  std::string demo, in, sigma_file;
  double lambda = -1.0;
  bool empirical = false;
  auto* cert = app.add_subcommand("certify", "decay certificate for a detailed-balance generator");
  cert->add_option("--demo", demo, "depolarizing, thermal or random");
  cert->add_option("--in", in, "generator JSON {sigma, jumps}");
  cert->add_option("--n", n_opt, "dimension for demos")->default_val(2);
  cert->add_option("--lambda", lambda, "rate to test (default: commutator rates, else 1/2)");
  cert->add_option("--trials", cfg.trials, "trials per sampled check");
  cert->add_option("--seed", cfg.seed, "random seed");
  cert->add_option("--out", cfg.output_dir, "output directory");
  cert->add_flag("--empirical", empirical, "also bisect for the empirical rate");

  // decompose
  std::string out_file;
  auto* dec = app.add_subcommand("decompose", "Alicki decomposition of a GNS detailed-balance generator");
  dec->add_option("--in", in, "generator JSON {superoperator} or {phi, H}")->required();
  dec->add_option("--sigma", sigma_file, "invariant state, matrix JSON")->required();
  dec->add_option("--out", out_file, "output file for the jumps (default jumps.json)")->default_val("jumps.json");

  // geodesic
  GeodesicOptions gopt;
  auto* geo = app.add_subcommand("geodesic", "transport distance between two states");
  geo->add_option("--in", in, "pair JSON {generator, rho0, rho1}");
  geo->add_option("--demo", demo, "depolarizing qubit between diag(0.2,0.8) and diag(0.8,0.2)");
  geo->add_option("--m,--geodesic-m", gopt.m, "time steps")->default_val(32);
  geo->add_option("--max-iter", gopt.max_iter, "maximum sweeps")->default_val(5000);
  geo->add_option("--tol", gopt.tol, "relative action change for convergence")->default_val(1e-8);
  geo->add_option("--out", cfg.output_dir, "output directory");

  // flow
  std::string rho_file;
  double t_max = 5.0;
  int steps = 50;
  auto* flow = app.add_subcommand("flow", "time series of D(P_t rho || sigma)");
  flow->add_option("--in", in, "generator JSON {sigma, jumps}");
  flow->add_option("--demo", demo, "depolarizing, thermal or random");
  flow->add_option("--n", n_opt, "dimension for demos")->default_val(2);
  flow->add_option("--rho", rho_file, "initial state, matrix JSON (default: random strict state)");
  flow->add_option("--t-max", t_max, "final time")->default_val(5.0);
  flow->add_option("--steps", steps, "number of time steps")->default_val(50);
  flow->add_option("--seed", cfg.seed, "random seed");
  flow->add_option("--out", cfg.output_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto config_error = [](const Error& e) {
    return e.code() == Errc::io_error || e.code() == Errc::invalid_input;
  };

  try {
    if (*run) {
      if (run->count("--n")) cfg.n = n_opt;
      for (const auto& [k, v] : cfg.tol.values) {
        std::string flag = "--tol-" + k;
        for (auto& ch : flag)
          if (ch == '_') ch = '-';
        if (run->count(flag)) cfg.tol.set(k, tol_flags[k]);
      }
      validate(cfg);
      ensure_dir(cfg.output_dir);
      Report rep = run_suites(cfg);
      return finish(rep, cfg);
    }

    if (*cert) {
      require(cfg.trials >= 1, Errc::invalid_input, "trials must be >= 1");
      DBGenerator db = load_generator(in, demo, n_opt);
      ensure_dir(cfg.output_dir);
      const std::string id = "certify/" + (in.empty() ? demo : fs::path(in).stem().string()) + "/n" +
                             std::to_string(db.dim());
      Report rep;
      RatesReport rates = commutator_rates(db);
      double lam = lambda;
      if (lam < 0) lam = rates.certified() ? rates.lambda : 0.5;
      rep.add({id, "commutator_rates", rates.lambda, static_cast<int>(db.size()), rates.certified() ? rates.lambda : 0.0,
               rates.uniform, false, 0.0});
      CheckResult ge = gradient_estimate_check(db, lam, cfg.trials, sub_seed(cfg.seed, 1));
      CheckResult adi = action_dissipation_check(db, lam, cfg.trials, sub_seed(cfg.seed, 2));
      rep.slack(id, ge.check, cfg.trials, ge.worst_slack, ge.tol, lam);
      rep.slack(id, adi.check, cfg.trials, adi.worst_slack, adi.tol, lam);
      rep.add({id, "ge_adi_agreement", lam, cfg.trials, ge.pass() == adi.pass() ? 0.0 : -1.0, ge.pass() == adi.pass(),
               true, 0.0});
      if (lam > 0) {
        std::mt19937_64 gen(sub_seed(cfg.seed, 3));
        DecayTable tab = decay_check(db, lam, random_density_matrix(db.dim(), true, gen),
                                     {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0});
        double w = tab.monotone ? std::numeric_limits<double>::infinity() : -1.0;
        for (const auto& r : tab.rows) w = std::min(w, r.slack);
        rep.slack(id, "entropy_decay", static_cast<int>(tab.rows.size()), w, kDecayTol, lam);
        CheckResult lsi = lsi_check(db, lam, cfg.trials, sub_seed(cfg.seed, 4));
        rep.slack(id, "lsi", cfg.trials, lsi.worst_slack, lsi.tol, lam);
      }
      if (empirical) {
        const double cap = 8.0;
        double emp = empirical_lambda(db, cap, std::min(cfg.trials, 50), sub_seed(cfg.seed, 5));
        rep.add({id, "empirical_lambda", emp, std::min(cfg.trials, 50), 0.0, true, false, 0.0});
        std::printf("empirical lambda (sampled, not a certificate): %s%.6f\n", emp >= cap ? ">= " : "", emp);
      }
      std::printf("lambda = %.6g (%s)\n", lam,
                  rates.certified() && lambda < 0 ? "commutator rates" : "sampled action dissipation");
      return finish(rep, cfg);
    }

    if (*dec) {
      SuperOperator l;
      Matrix sigma;
      try {
        l = generator_from_json(read_json_file(in));
        sigma = matrix_from_json(read_json_file(sigma_file));
      } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
      }
      DecomposeReport rep;
      DBGenerator db = alicki_decompose(l, sigma, &rep);
      ErgodicityReport erg = ergodicity_check(db);
      double bkm = bkm_selfadjoint_check(l, sigma);
      double rebuilt = max_abs(db.superop().mat - l.mat);
      json out = to_json(db);
      out["verification"] = {{"reconstruction", rep.reconstruction}, {"rebuild_max_abs", rebuilt},
                             {"leakage", rep.leakage},               {"modular", rep.modular},
                             {"closure", rep.closure},               {"ergodic", erg.ergodic},
                             {"commutant_dim", erg.commutant_dim},   {"bkm_selfadjoint", bkm}};
      write_json_file(out_file, out);
      std::printf("%zu jumps; reconstruction residual %.3e; rebuild %.3e; leakage %.3e; ergodic %s; BKM %.3e\n",
                  db.size(), rep.reconstruction, rebuilt, rep.leakage, erg.ergodic ? "yes" : "no", bkm);
      std::printf("wrote %s\n", out_file.c_str());
      return rebuilt <= 1e-8 ? 0 : 2;
    }

    if (*geo) {
      DBGenerator db = depolarizing_db(2);
      Matrix r0, r1;
      std::string name = "depolarizing";
      if (!in.empty()) {
        json j = read_json_file(in);
        require(j.contains("rho0") && j.contains("rho1"), Errc::invalid_input, "pair JSON needs rho0 and rho1");
        if (j.contains("generator"))
          db = db_from_json(j.at("generator"));
        else if (j.contains("demo"))
          db = demo_generator(j.at("demo").get<std::string>(), j.value("n", 2));
        r0 = matrix_from_json(j.at("rho0"));
        r1 = matrix_from_json(j.at("rho1"));
        name = fs::path(in).stem().string();
      } else {
        require(demo.empty() || demo == "depolarizing", Errc::invalid_input, "geodesic demo is \"depolarizing\"");
        std::tie(r0, r1) = diagonal_qubit_pair(0.2, 0.8);
      }
      require(gopt.m >= 1 && gopt.max_iter >= 1 && gopt.tol > 0, Errc::invalid_input, "bad geodesic options");
      ensure_dir(cfg.output_dir);
      GeodesicPath p = geodesic_distance(db, r0, r1, gopt);
      GeodesicPath self = geodesic_distance(db, r0, r0, gopt);
      write_json_file(cfg.output_dir + "/geodesic.json", to_json(p));
      const std::string id = "geodesic/" + name + "/m" + std::to_string(gopt.m);
      Report rep;
      rep.add({id, "distance", std::nullopt, p.iterations, p.distance, p.converged, false, 0.0});
      rep.residual(id, "self_distance", self.iterations, self.action, 1e-10);
      std::printf("distance %.10f (action %.10e, %d sweeps, %s)\n", p.distance, p.action, p.iterations,
                  p.converged ? "converged" : "not converged");
      return finish(rep, cfg);
    }

    if (*flow) {
      require(steps >= 1 && t_max > 0, Errc::invalid_input, "need --steps >= 1 and --t-max > 0");
      DBGenerator db = load_generator(in, demo, n_opt);
      Matrix rho;
      if (!rho_file.empty()) {
        rho = matrix_from_json(read_json_file(rho_file));
      } else {
        std::mt19937_64 gen(cfg.seed);
        rho = random_density_matrix(db.dim(), true, gen);
      }
      require_density(rho, false, "flow");
      ensure_dir(cfg.output_dir);
      SuperOperator l = db.superop();
      std::ostringstream os;
      os << "t,relative_entropy,entropy_production,trace_distance\n";
      double prev = std::numeric_limits<double>::infinity();
      bool monotone = true;
      char buf[160];
      for (int k = 0; k <= steps; ++k) {
        double t = t_max * k / steps;
        Matrix rt = hermitian_part(semigroup_apply(l, t, rho, Side::schroedinger));
        double d = relative_entropy(rt, db.sigma());
        double prod = min_eigenvalue(rt) > 1e-12 ? entropy_production(db, rt) : std::nan("");
        std::snprintf(buf, sizeof buf, "%.6f,%.12e,%.12e,%.12e\n", t, d, prod, trace_distance(rt, db.sigma()));
        os << buf;
        if (d > prev + 1e-12) monotone = false;
        prev = d;
      }
      write_text_file(cfg.output_dir + "/flow.csv", os.str());
      std::printf("wrote %s/flow.csv; relative entropy %s along the flow\n", cfg.output_dir.c_str(),
                  monotone ? "is non-increasing" : "INCREASES");
      return monotone ? 0 : 2;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return config_error(e) ? 1 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
