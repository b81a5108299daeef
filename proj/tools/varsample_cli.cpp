// varsample: dimension counts, minimal-measurement bounds, injectivity
// certificates and recovery from the command line. JSON goes to stdout (or
// --out), progress to stderr.

#include "varsample/varsample.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace varsample;

namespace {

struct Common {
  std::uint64_t seed = 0;
  int restarts = 200;
  double tol = 1e-8;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c, bool search_flags) {
  app->add_option("--seed", c.seed, "random seed");
  if (search_flags) {
    app->add_option("--restarts", c.restarts, "search restarts");
    app->add_option("--tol", c.tol, "feasibility / fit tolerance");
  }
  app->add_option("--out", c.out, "write output here instead of stdout");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void emit_text(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(c.out, text.back() == '\n' ? text : text + "\n");
    std::cerr << "wrote " << c.out << '\n';
  }
}

void emit(const Common& c, const json& j) { emit_text(c, canonical_dump(j)); }

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  std::pair<int, int> r;
  try {
    if (colon == std::string::npos) {
      r.first = r.second = std::stoi(text);
    } else {
      r = {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("range must be N or A:B, got '" + text + "'");
  }
  if (r.first > r.second) throw std::invalid_argument("range " + text + " is empty");
  return r;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

MeasurementEnsemble load_ensemble(const std::string& name) {
  if (name == "paper11") return eleven_matrix_ensemble();
  return ensemble_from_json(read_json_file(name));
}

CertifyConfig certify_config(const Common& c) {
  CertifyConfig cfg;
  cfg.search.restarts = c.restarts;
  cfg.search.tol_feas = c.tol;
  cfg.search.seed = c.seed;
  return cfg;
}

/// Re-checks a refutation from scratch: unit norm, membership, residual and an
/// honest collision.
bool refutation_holds(const MeasurementEnsemble& e, const InjectivityVerdict& v) {
  if (v.status != Status::RefutedWithWitness) return true;
  if (!v.witness || !v.collision) return false;
  const Element& q = v.witness->element;
  const RealifiedOperator op(difference_ensemble(e, v.signal), Coordinates(v.difference.ambient(), v.difference.field()));
  return std::abs(q.norm() - 1.0) <= 1e-10 && membership(q, v.difference, 1e-8) &&
         op.relative_residual(q) <= v.config.search.tol_feas &&
         v.collision->gap <= std::sqrt(2.0) * v.config.search.tol_feas && v.collision->distinct;
}

// -- verify-paper -----------------------------------------------------------------

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<Check> check_data() {
  bool ok = true;
  const auto e = eleven_matrix_ensemble();
  for (int j = 0; j < 11; ++j)
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        ok = ok && e.op(j)(r, c) == Complex(kElevenMatrices[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)]
                                                                [static_cast<std::size_t>(c)],
                                            0.0);
  const Element a1 = e.op(0);
  ok = ok && a1(0, 0) == -4.0 && a1(0, 1) == 1.0 && a1(0, 2) == 3.0 && a1(0, 3) == 4.0;
  const Element q0 = skew_corner(4);
  const bool skew = (q0 + q0.transpose()).norm() == 0.0;
  return {{"data.eleven_matrices", ok, "11 integer 4x4 matrices, A1 row 1 = (-4 1 3 4)"},
          {"data.q0_skew", skew, "Q0 is skew-symmetric"}};
}

std::vector<Check> check_minor(std::uint64_t seed) {
  MinorSystemConfig cfg;
  cfg.seed = seed;
  const auto r = verify_kernel_minor_system(eleven_matrix_ensemble(), 2, cfg);
  return {{"minor_system.eleven", r.restarts >= 500 && r.min_residual > 1e-6,
           "min residual " + fmt(r.min_residual) + " over " + std::to_string(r.restarts) + " restarts"}};
}

std::vector<Check> check_certify(std::uint64_t seed) {
  CertifyConfig cfg;
  cfg.search.seed = seed;
  const auto v = certify(eleven_matrix_ensemble(), VarietySpec::low_rank(4, 1, Field::Real), cfg);
  return {{"certify.eleven_rank1_real", v.status == Status::NoWitnessFound,
           std::string(to_string(v.status)) + ", margin " + fmt(v.margin.value_or(-1))}};
}

std::vector<Check> check_threshold(std::uint64_t seed) {
  std::vector<Check> out;
  CertifyConfig cfg;
  cfg.search.seed = seed;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto e11 = gen_gaussian_matrices(4, 11, Field::Complex, s);
    const auto v11 = certify(e11, VarietySpec::low_rank(4, 1, Field::Complex), cfg);
    out.push_back({"threshold.m11.seed" + std::to_string(s),
                   v11.status == Status::RefutedWithWitness && v11.witness->residual < 1e-8 && refutation_holds(e11, v11),
                   std::string(to_string(v11.status)) + " after " + std::to_string(v11.restarts_used) + " restarts"});
    const auto e12 = gen_gaussian_matrices(4, 12, Field::Complex, s);
    const auto v12 = certify(e12, VarietySpec::low_rank(4, 1, Field::Complex), cfg);
    out.push_back({"threshold.m12.seed" + std::to_string(s),
                   v12.status == Status::NoWitnessFound && v12.margin && *v12.margin > 1e-6,
                   std::string(to_string(v12.status)) + ", margin " + fmt(v12.margin.value_or(-1))});
  }
  return out;
}

std::vector<Check> check_bounds() {
  const std::vector<std::pair<int, long long>> complex_exact = {{2, 3}, {5, 16}, {6, 18}, {7, 23}, {9, 32}, {15, 54}};
  bool ok = true;
  for (const auto& [d, v] : complex_exact) ok = ok && complex_pr_bounds(d).exact == v;
  ok = ok && real_pr_bounds(5).exact == 9LL && real_pr_bounds(6).exact == 10LL;
  bool sweep = true;
  for (int d = 5; d <= 4098; ++d) sweep = sweep && complex_pr_bounds(d).consistent() && real_pr_bounds(d).consistent();
  return {{"bounds.exact_values", ok, "complex d=2,5,6,7,9,15 and real d=5,6"},
          {"bounds.sweep_5_4098", sweep, "lower <= exact <= upper"}};
}

std::vector<Check> check_admissibility(std::uint64_t seed) {
  std::vector<Check> out;
  for (int d : {2, 4, 8}) {
    const auto r = admissibility_probe(symmetric_sampler(d), skew_corner(d), 10000, seed);
    out.push_back({"admissibility.q0.d" + std::to_string(d), r.vanishes,
                   "vanishes on " + std::to_string(r.samples_checked) + " symmetric samples"});
  }
  Element e11 = Element::Zero(4, 4);
  e11(0, 0) = 1.0;
  const auto r = admissibility_probe(symmetric_sampler(4), e11, 10000, seed);
  out.push_back({"admissibility.e11", !r.vanishes, "non-degenerate after " + std::to_string(r.samples_checked)});
  return out;
}

int cmd_verify_paper(const Common& c, const std::string& only) {
  using Group = std::pair<std::string, std::function<std::vector<Check>()>>;
  const std::vector<Group> groups = {
      {"data", check_data},
      {"minor", [&] { return check_minor(c.seed); }},
      {"certify", [&] { return check_certify(c.seed); }},
      {"threshold", [&] { return check_threshold(c.seed); }},
      {"bounds", check_bounds},
      {"admissibility", [&] { return check_admissibility(c.seed); }},
  };
  json checks = json::array();
  bool all = true;
  bool matched = false;
  for (const auto& [name, run] : groups) {
    if (!only.empty() && only != name) continue;
    matched = true;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& ch : run()) {
      std::cerr << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
      checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
      all = all && ch.pass;
    }
    std::cerr << "  [" << name << " "
              << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) << " s]\n";
  }
  if (!matched) throw std::invalid_argument("--only must name one of data, minor, certify, threshold, bounds, admissibility");
  emit(c, {{"checks", checks}, {"all_pass", all}});
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling numbers, injectivity and recovery for signals on algebraic varieties"};
  app.require_subcommand(1);
  Common common;

  // dims
  auto* dims = app.add_subcommand("dims", "dimension of a variety");
  std::string dims_kind;
  int dims_d = 0, dims_p = 0;
  std::string dims_field = "complex";
  dims->add_option("KIND", dims_kind, "sparse | low_rank | sym_low_rank")->required();
  dims->add_option("D", dims_d)->required();
  dims->add_option("R_OR_K", dims_p)->required();
  dims->add_option("--field", dims_field);
  add_common(dims, common, false);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "minimal measurement numbers");
  std::string b_setting, b_field = "complex", b_sweep;
  std::optional<int> b_d, b_param, b_m, b_pos_d, b_pos_param;
  std::string b_pos_setting;
  bounds->add_option("SETTING", b_pos_setting, "complex_pr | real_pr | standard_pr | sparse | low_rank | generic");
  bounds->add_option("D", b_pos_d);
  bounds->add_option("PARAM", b_pos_param, "k for sparse, r for low_rank");
  bounds->add_option("--setting", b_setting);
  bounds->add_option("--d", b_d);
  bounds->add_option("--r,--k", b_param);
  bounds->add_option("--m", b_m, "measurement count (generic: dim W is --d)");
  bounds->add_option("--field", b_field);
  bounds->add_option("--sweep", b_sweep, "d range a:b, CSV output");
  add_common(bounds, common, false);

  // generate
  auto* gen = app.add_subcommand("generate", "seeded measurement ensemble");
  std::string g_kind = "gaussian", g_field = "real", g_ranks;
  int g_d = 0, g_m = 0;
  gen->add_option("--kind", g_kind, "gaussian | gaussian_matrix | symmetric_rank | hermitian_rank")
      ->check(CLI::IsMember({"gaussian", "gaussian_matrix", "symmetric_rank", "hermitian_rank"}));
  gen->add_option("--d", g_d)->required();
  gen->add_option("--m", g_m);
  gen->add_option("--field", g_field);
  gen->add_option("--ranks", g_ranks, "comma separated ranks (rank kinds)");
  add_common(gen, common, false);

  // certify
  auto* cert = app.add_subcommand("certify", "injectivity verdict");
  std::string c_ens, c_var, c_field = "complex";
  int c_d = 0, c_r = 1, c_m = 0;
  std::uint64_t c_ens_seed = 0;
  bool c_no_exact = false;
  cert->add_option("--ensemble", c_ens, "ensemble JSON file or paper11");
  cert->add_option("--variety", c_var, "signal variety kind:param, kind:d:param or phase");
  cert->add_option("--d", c_d, "generate a Gaussian matrix ensemble of this size");
  cert->add_option("--r", c_r);
  cert->add_option("--m", c_m);
  cert->add_option("--field", c_field);
  cert->add_option("--ensemble-seed", c_ens_seed, "seed of the generated ensemble (default --seed)");
  cert->add_flag("--no-exact", c_no_exact, "always use the witness search");
  add_common(cert, common, true);

  // recover
  auto* rec = app.add_subcommand("recover", "recover a signal from samples");
  std::string r_ens, r_samples, r_var, r_field = "complex";
  rec->add_option("--ensemble", r_ens)->required();
  rec->add_option("--samples", r_samples)->required();
  rec->add_option("--variety", r_var, "sparse:k | low_rank:r | phase")->required();
  rec->add_option("--field", r_field);
  add_common(rec, common, true);

  // sweep
  auto* sw = app.add_subcommand("sweep", "phase transition table (CSV)");
  SweepSpec spec;
  std::string s_range = "1:8", s_field = "complex";
  sw->add_option("--setting", spec.setting, "sparse | low_rank | real_pr | complex_pr")
      ->required()
      ->check(CLI::IsMember({"sparse", "low_rank", "real_pr", "complex_pr"}));
  sw->add_option("--d", spec.d);
  sw->add_option("--param,--k,--r", spec.param);
  sw->add_option("--m", s_range, "m range a:b");
  sw->add_option("--trials", spec.trials);
  sw->add_option("--field", s_field);
  add_common(sw, common, false);

  // verify-paper
  auto* vp = app.add_subcommand("verify-paper", "reproduce the published constructions and bounds");
  std::string only;
  vp->add_option("--only", only, "data | minor | certify | threshold | bounds | admissibility");
  add_common(vp, common, false);

  // demo-admissibility
  auto* demo = app.add_subcommand("demo-admissibility", "probe a functional on symmetric matrices");
  int a_d = 4, a_n = 10000;
  std::string a_fun = "q0";
  demo->add_option("--d", a_d);
  demo->add_option("--functional", a_fun, "q0 | e11")->check(CLI::IsMember({"q0", "e11"}));
  demo->add_option("--samples", a_n);
  add_common(demo, common, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dims) {
      const Field f = field_from_string(dims_field);
      const VarietySpec w(variety_kind_from_string(dims_kind), dims_d, dims_p, f);
      emit(common, {{"variety", variety_to_json(w)}, {"dimension", w.dimension()}});
      return 0;
    }

    if (*bounds) {
      if (b_setting.empty()) b_setting = b_pos_setting;
      if (!b_d) b_d = b_pos_d;
      if (!b_param) b_param = b_pos_param;
      if (b_setting.empty()) throw std::invalid_argument("bounds needs a setting");
      const Field f = field_from_string(b_field);
      if (!b_sweep.empty()) {
        const auto [from, to] = parse_range(b_sweep);
        emit_text(common, bounds_sweep_csv(b_setting, from, to, b_param.value_or(0), f));
        return 0;
      }
      if (!b_d) throw std::invalid_argument("bounds needs d");
      BoundsReport r = b_setting == "generic" ? generic_variety(*b_d, b_m.value_or(*b_d))
                                              : bounds_for(b_setting, *b_d, b_param.value_or(0), f);
      if (common.format == "csv") {
        std::ostringstream row;
        row << "d,lower,upper,exact,regime\n"
            << r.d << ',' << r.lower << ',' << r.upper << ',' << (r.exact ? std::to_string(*r.exact) : "") << ','
            << r.regime << '\n';
        emit_text(common, row.str());
      } else {
        emit(common, bounds_to_json(r));
      }
      return r.consistent() ? 0 : 1;
    }

    if (*gen) {
      const Field f = field_from_string(g_field);
      std::optional<MeasurementEnsemble> e;
      if (g_kind == "gaussian") e = gen_gaussian_vectors(g_d, g_m, f, common.seed);
      if (g_kind == "gaussian_matrix") e = gen_gaussian_matrices(g_d, g_m, f, common.seed);
      if (g_kind == "symmetric_rank") e = gen_symmetric_rank(g_d, parse_int_list(g_ranks), common.seed);
      if (g_kind == "hermitian_rank") e = gen_hermitian_rank(g_d, parse_int_list(g_ranks), common.seed);
      emit(common, ensemble_to_json(*e));
      return 0;
    }

    if (*cert) {
      const Field f = field_from_string(c_field);
      std::optional<MeasurementEnsemble> e;
      std::optional<VarietySpec> signal;
      if (!c_ens.empty()) {
        e = load_ensemble(c_ens);
        if (c_var.empty()) throw std::invalid_argument("--ensemble needs --variety");
        const Field vf = c_ens == "paper11" ? Field::Real : e->field();
        const Field sf = cert->count("--field") ? f : vf;
        signal = c_var == "phase" ? VarietySpec::phase_lift(e->d(), sf) : parse_variety(c_var, e->d(), sf);
      } else {
        if (c_d < 1 || c_m < 1) throw std::invalid_argument("certify needs --ensemble or --d and --m");
        const std::uint64_t es = cert->count("--ensemble-seed") ? c_ens_seed : common.seed;
        e = gen_gaussian_matrices(c_d, c_m, f, es);
        signal = c_var.empty() ? VarietySpec::low_rank(c_d, c_r, f) : parse_variety(c_var, c_d, f);
      }
      CertifyConfig cfg = certify_config(common);
      cfg.exact_tests = !c_no_exact;
      std::cerr << "certify " << signal->describe() << " with m = " << e->m() << '\n';
      const auto v = certify(*e, *signal, cfg);
      std::cerr << to_string(v.status) << " via " << v.method << '\n';
      emit(common, verdict_to_json(v));
      return refutation_holds(*e, v) ? 0 : 1;
    }

    if (*rec) {
      const auto e = load_ensemble(r_ens);
      const ComplexVector y = samples_from_json(read_json_file(r_samples));
      RecoveryConfig cfg;
      cfg.seed = common.seed;
      cfg.tol_fit = common.tol;
      RecoveryOutcome out;
      if (r_var == "phase") {
        out = recover_phase(e, y, cfg);
      } else {
        const VarietySpec w = parse_variety(r_var, e.d(), e.field());
        if (w.kind() == VarietyKind::Sparse) {
          out = recover_sparse(e, y, w.param(), cfg);
        } else if (w.kind() == VarietyKind::LowRank) {
          out = recover_low_rank(e, y, w.param(), cfg);
        } else {
          throw std::invalid_argument("recover supports sparse:k, low_rank:r and phase");
        }
      }
      std::cerr << (out.converged ? "converged" : "not converged") << ", residual " << fmt(out.residual) << '\n';
      emit(common, outcome_to_json(out));
      return 0;
    }

    if (*sw) {
      const auto [from, to] = parse_range(s_range);
      spec.m_from = from;
      spec.m_to = to;
      spec.seed = common.seed;
      spec.field = field_from_string(s_field);
      emit_text(common, sweep_csv(phase_transition_sweep(spec)));
      return 0;
    }

    if (*vp) return cmd_verify_paper(common, only);

    if (*demo) {
      Element fun = skew_corner(a_d);
      if (a_fun == "e11") {
        fun = Element::Zero(a_d, a_d);
        fun(0, 0) = 1.0;
      }
      const auto r = admissibility_probe(symmetric_sampler(a_d), fun, a_n, common.seed);
      json j = {{"d", a_d},
                {"functional", a_fun},
                {"result", r.vanishes ? "VanishesOnAllSamples" : "NonDegenerate"},
                {"samples_checked", r.samples_checked},
                {"max_ratio", r.max_ratio}};
      if (r.sample) j["sample"] = element_to_json(*r.sample);
      std::cerr << a_fun << " on symmetric " << a_d << "x" << a_d << ": " << j["result"].get<std::string>() << '\n';
      emit(common, j);
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}
