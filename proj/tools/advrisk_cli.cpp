// Command-line front end: loads instance files, runs loss certificates,
// risk evaluations, W-inf transport, dual searches, duality gaps, the
// counterexample reproduction, the rho-margin excess-risk check and
// complementary-slackness reports.  Emits JSON on stdout, CSV on request.
//
// Exit codes: 0 success, 2 input error, 3 enumeration-budget error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advrisk/advrisk.hpp"

namespace {

using advrisk::ExtReal;
using advrisk::Instance;
using advrisk::json;
using advrisk::LossFunction;

json num_or_inf(double v) { return advrisk::detail::ext_real_to_json(ExtReal(v)); }

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

Instance load_instance(const std::string& path) {
  return advrisk::parse_instance(load_json_file(path));
}

unsigned long long env_budget_or(unsigned long long fallback) {
  const char* s = std::getenv("ADVRISK_BUDGET");
  if (!s || !*s) return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0')
    throw std::invalid_argument("ADVRISK_BUDGET must be an unsigned integer");
  return v;
}

struct BudgetOpts {
  std::optional<unsigned long long> flag;  // --budget

  unsigned long long enumeration(const Instance& inst) const {
    if (flag) return *flag;
    if (inst.enumeration_budget) return *inst.enumeration_budget;
    return env_budget_or(advrisk::kDefaultEnumerationBudget);
  }
  unsigned long long dual(const Instance& inst) const {
    if (flag) return *flag;
    if (inst.dual_budget) return *inst.dual_budget;
    return env_budget_or(advrisk::kDefaultDualBudget);
  }
};

// RFC-4180-style CSV: quote fields containing commas, quotes or newlines;
// header row mandatory.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open CSV output: " + path);
  const auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += "\"\"";
      else q += ch;
    }
    return q + "\"";
  };
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << field(cells[i]);
    }
    out << "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

LossFunction loss_from_flags(const std::string& family, std::optional<double> rho,
                             std::optional<double> tau, const std::string& inline_json,
                             const std::string& file) {
  if (!inline_json.empty()) return advrisk::loss_from_json(json::parse(inline_json));
  if (!file.empty()) {
    json j = load_json_file(file);
    if (j.contains("loss")) return advrisk::loss_from_json(j.at("loss"));
    return advrisk::loss_from_json(j);
  }
  if (family.empty())
    throw std::invalid_argument("no loss given: use --family, --json or --file");
  json j;
  j["family"] = family;
  if (rho) j["rho"] = *rho;
  if (tau) j["tau"] = *tau;
  return advrisk::loss_from_json(j);
}

json certificate_report(const LossFunction& loss) {
  advrisk::ConsistencyCertificate cert = advrisk::consistency_certificate(loss);
  json out;
  out["loss"] = advrisk::loss_to_json(loss);
  out["cstar_half"] = cert.cstar_half;
  out["phi_zero"] = cert.phi_zero;
  out["margin"] = cert.margin;
  out["adversarially_consistent"] = cert.adversarially_consistent;
  if (cert.adversarially_consistent) {
    advrisk::MarginConstants mc = advrisk::margin_constants(loss);
    out["constants"] = {{"a", num_or_inf(mc.a)}, {"c", mc.c}, {"delta", mc.delta}};
  }
  return out;
}

json candidate_to_json(const advrisk::DualCandidate& cand, std::size_t n0) {
  json assignments = json::array();
  for (std::size_t k = 0; k < cand.assignment.size(); ++k) {
    assignments.push_back({{"measure", k < n0 ? "p0" : "p1"},
                           {"atom", k < n0 ? k : k - n0},
                           {"destination", cand.assignment[k]}});
  }
  const auto measure_to_json = [](const advrisk::DiscreteMeasure& m) {
    json out = json::array();
    for (const advrisk::Atom& a : m.atoms())
      out.push_back({{"location", a.location}, {"mass", a.mass}});
    return out;
  };
  json post;
  post["support"] = cand.posterior_prime.support;
  post["p_mass"] = cand.posterior_prime.p_mass;
  post["eta"] = cand.posterior_prime.eta;
  json out;
  out["method"] = cand.method;
  out["assignments"] = assignments;
  out["objective_classification"] = cand.objective_classification;
  if (cand.objective_surrogate) out["objective_surrogate"] = *cand.objective_surrogate;
  out["p0_prime"] = measure_to_json(cand.p0_prime);
  out["p1_prime"] = measure_to_json(cand.p1_prime);
  out["posterior"] = post;
  return out;
}

json values_to_json(const std::vector<ExtReal>& vs) {
  json out = json::array();
  for (ExtReal v : vs) out.push_back(advrisk::detail::ext_real_to_json(v));
  return out;
}

json slackness_rows_to_json(const std::vector<advrisk::SlacknessRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"n", r.n},
                   {"surrogate_conditional_residual", num_or_inf(r.surrogate_conditional_residual)},
                   {"surrogate_transport_residual_p1", num_or_inf(r.surrogate_transport_residual_p1)},
                   {"surrogate_transport_residual_p0", num_or_inf(r.surrogate_transport_residual_p0)},
                   {"classification_conditional_residual", r.classification_conditional_residual},
                   {"classification_transport_residual_p1", r.classification_transport_residual_p1},
                   {"classification_transport_residual_p0", r.classification_transport_residual_p0},
                   {"classification_p1_slack_holds", r.classification_p1_slack_holds},
                   {"classification_p0_slack_holds", r.classification_p0_slack_holds}});
  }
  return out;
}

std::vector<long> parse_n_list(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stol(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty n list");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"adversarial classification and surrogate risks on discrete instances"};
  app.require_subcommand(1);

  // check-loss
  auto* check = app.add_subcommand("check-loss", "consistency certificate for a loss");
  std::string cl_family, cl_json, cl_file;
  std::optional<double> cl_rho, cl_tau;
  check->add_option("--family", cl_family, "hinge|squared_hinge|exponential|logistic|rho_margin|shifted_sigmoid");
  check->add_option("--rho", cl_rho, "rho for rho_margin");
  check->add_option("--tau", cl_tau, "tau for shifted_sigmoid");
  check->add_option("--json", cl_json, "inline loss JSON");
  check->add_option("--file", cl_file, "file with a loss JSON (or an instance; its loss is used)");

  // shared instance-based options
  std::string instance_path, csv_path;
  std::optional<double> eps_override;
  BudgetOpts budgets;

  auto add_instance_opts = [&](CLI::App* sub, bool with_csv = false) {
    sub->add_option("instance", instance_path, "instance JSON file")->required();
    sub->add_option("--eps", eps_override, "override instance epsilon");
    sub->add_option("--budget", budgets.flag, "enumeration budget cap");
    if (with_csv) sub->add_option("--csv", csv_path, "also write CSV to this path");
  };

  auto* risks = app.add_subcommand("risks", "the four risks for the instance classifiers");
  std::string risks_classifier;
  add_instance_opts(risks);
  risks->add_option("--classifier", risks_classifier, "evaluate only this named classifier");

  auto* winf = app.add_subcommand("winf", "W-inf distance between p0 and p1 with witness coupling");
  add_instance_opts(winf, true);

  auto* dual = app.add_subcommand("dual", "maximize the dual objective over the eps-balls");
  add_instance_opts(dual);

  auto* gap = app.add_subcommand("gap", "primal brute force vs dual search");
  add_instance_opts(gap);

  auto* counter = app.add_subcommand("counterexample", "segment instance with eps = 2R");
  std::string ce_family = "hinge", ce_json, ce_file, ce_nlist = "1,10,100";
  std::optional<double> ce_rho, ce_tau;
  double ce_R = 1.0;
  int ce_points = 21;
  bool ce_with_gap = false;
  counter->add_option("--R", ce_R, "segment half-width (eps = 2R)");
  counter->add_option("--n-points", ce_points, "atoms per class");
  counter->add_option("--family", ce_family, "loss family");
  counter->add_option("--rho", ce_rho, "rho for rho_margin");
  counter->add_option("--tau", ce_tau, "tau for shifted_sigmoid");
  counter->add_option("--json", ce_json, "inline loss JSON");
  counter->add_option("--file", ce_file, "file with a loss JSON");
  counter->add_option("--n", ce_nlist, "comma-separated n values");
  counter->add_flag("--with-gap", ce_with_gap, "also run duality_gap on the instance");
  counter->add_option("--budget", budgets.flag, "enumeration budget cap");
  counter->add_option("--csv", csv_path, "also write the per-n rows as CSV");

  auto* margin = app.add_subcommand("margin-bound", "rho-margin excess-risk bound check");
  int mb_trials = 100;
  std::uint64_t mb_seed = 1;
  add_instance_opts(margin);
  margin->add_option("--trials", mb_trials, "number of random classifiers");
  margin->add_option("--seed", mb_seed, "SplitMix64 seed for random classifiers");

  auto* slack = app.add_subcommand("slackness", "complementary-slackness residuals for f_n");
  std::string sl_nlist = "1,10,100,1000";
  std::optional<std::size_t> sl_merge_at;
  add_instance_opts(slack, true);
  slack->add_option("--n-list", sl_nlist, "comma-separated n values");
  slack->add_option("--merge-at", sl_merge_at,
                    "scene index: use the candidate merging all atoms there "
                    "(default: maximize_dual)");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    emit(certificate_report(loss_from_flags(cl_family, cl_rho, cl_tau, cl_json, cl_file)));
    return 0;
  }

  if (counter->parsed()) {
    LossFunction loss = loss_from_flags(ce_family, ce_rho, ce_tau, ce_json, ce_file);
    double eps = 2.0 * ce_R;
    advrisk::DiscreteMeasure seg = advrisk::uniform_segment(ce_R, ce_points, 0.5);
    advrisk::LabeledDistribution dist(seg, seg);
    std::vector<advrisk::Point> pts;
    for (const advrisk::Atom& a : seg.atoms()) pts.push_back(a.location);
    auto scene = advrisk::make_scene(1, seg.norm(), std::move(pts));

    advrisk::TabulatedClassifier f_star(scene, std::vector<ExtReal>(scene->size(), ExtReal(0.0)));
    json out;
    out["R"] = ce_R;
    out["n_points"] = ce_points;
    out["epsilon"] = eps;
    out["loss"] = advrisk::loss_to_json(loss);
    out["f_star"] = {
        {"adversarial_surrogate_risk",
         num_or_inf(advrisk::adversarial_surrogate_risk(dist, f_star, loss, eps).raw())},
        {"adversarial_classification_risk",
         advrisk::adversarial_classification_risk(dist, f_star, eps)}};
    json rows = json::array();
    std::vector<std::vector<std::string>> csv_rows;
    for (long n : parse_n_list(ce_nlist)) {
      auto f_n = advrisk::counterexample_classifier(scene, n);
      double rs = advrisk::adversarial_surrogate_risk(dist, f_n, loss, eps).raw();
      double rc = advrisk::adversarial_classification_risk(dist, f_n, eps);
      double phi = loss(ExtReal(-1.0 / static_cast<double>(n))).raw();
      rows.push_back({{"n", n},
                      {"adversarial_surrogate_risk", num_or_inf(rs)},
                      {"adversarial_classification_risk", rc},
                      {"surrogate_matches_phi", std::fabs(rs - phi) <= 1e-12},
                      {"classification_equals_one", std::fabs(rc - 1.0) <= 1e-12}});
      csv_rows.push_back({std::to_string(n), fmt(rs), fmt(rc)});
    }
    out["rows"] = rows;
    if (ce_with_gap) {
      Instance tmp{1, seg.norm(), eps, scene,
                   advrisk::LabeledDistribution(seg, seg), loss, {}, {}, {}, {}};
      advrisk::DualityGapReport rep = advrisk::duality_gap(
          tmp.dist, eps, scene, &loss, {}, budgets.enumeration(tmp), budgets.dual(tmp));
      out["gap"] = {{"primal", rep.primal}, {"dual", rep.dual}, {"gap", rep.gap}};
    }
    emit(out);
    if (!csv_path.empty())
      write_csv(csv_path,
                {"n", "adversarial_surrogate_risk", "adversarial_classification_risk"},
                csv_rows);
    return 0;
  }

  Instance inst = load_instance(instance_path);
  double eps = eps_override.value_or(inst.epsilon);

  if (risks->parsed()) {
    advrisk::PosteriorView post = advrisk::posterior(inst.dist);
    json out;
    out["epsilon"] = eps;
    out["optimal_zero_one_risk"] = advrisk::optimal_zero_one_risk(post);
    if (inst.loss)
      out["optimal_surrogate_risk"] = advrisk::optimal_surrogate_risk(post, *inst.loss);
    json per = json::array();
    for (const advrisk::ClassifierSpec& spec : inst.classifiers) {
      if (!risks_classifier.empty() && spec.name != risks_classifier) continue;
      advrisk::TabulatedClassifier f(inst.scene, spec.values);
      json r;
      r["name"] = spec.name;
      r["classification_risk"] = advrisk::classification_risk(inst.dist, f);
      r["adversarial_classification_risk"] =
          advrisk::adversarial_classification_risk(inst.dist, f, eps);
      if (inst.loss) {
        r["surrogate_risk"] = num_or_inf(advrisk::surrogate_risk(inst.dist, f, *inst.loss).raw());
        r["pointwise_surrogate_risk"] =
            num_or_inf(advrisk::pointwise_surrogate_risk(post, f, *inst.loss).raw());
        r["adversarial_surrogate_risk"] =
            num_or_inf(advrisk::adversarial_surrogate_risk(inst.dist, f, *inst.loss, eps).raw());
      }
      per.push_back(r);
    }
    out["classifiers"] = per;
    emit(out);
    return 0;
  }

  if (winf->parsed()) {
    advrisk::WinfResult r = advrisk::winf_distance(inst.dist.p0, inst.dist.p1);
    json entries = json::array();
    std::vector<std::vector<std::string>> csv_rows;
    for (const advrisk::CouplingEntry& e : r.witness.entries) {
      entries.push_back({{"source", e.source},
                         {"target", e.target},
                         {"mass", e.mass},
                         {"distance", e.distance}});
      csv_rows.push_back({std::to_string(e.source), std::to_string(e.target),
                          fmt(e.mass), fmt(e.distance)});
    }
    json out;
    out["distance"] = num_or_inf(r.distance.raw());
    out["bottleneck"] = r.witness.bottleneck;
    out["coupling"] = entries;
    emit(out);
    if (!csv_path.empty())
      write_csv(csv_path, {"source_idx", "target_idx", "mass", "distance"}, csv_rows);
    return 0;
  }

  if (dual->parsed()) {
    advrisk::DualCandidate cand = advrisk::maximize_dual(
        inst.dist, eps, inst.scene, inst.loss ? &*inst.loss : nullptr, budgets.dual(inst));
    emit(candidate_to_json(cand, inst.dist.p0.atoms().size()));
    return 0;
  }

  if (gap->parsed()) {
    advrisk::DualityGapReport rep = advrisk::duality_gap(
        inst.dist, eps, inst.scene, inst.loss ? &*inst.loss : nullptr,
        inst.value_grid.value_or(std::vector<ExtReal>{}), budgets.enumeration(inst),
        budgets.dual(inst));
    json out;
    out["primal"] = rep.primal;
    out["dual"] = rep.dual;
    out["gap"] = rep.gap;
    out["primal_argmin"] = values_to_json(rep.primal_result.argmin.values());
    out["candidate"] = candidate_to_json(rep.candidate, inst.dist.p0.atoms().size());
    emit(out);
    return 0;
  }

  if (margin->parsed()) {
    if (!inst.loss || inst.loss->family() != LossFunction::Family::RhoMargin)
      throw std::invalid_argument("margin-bound: instance must carry a rho_margin loss");
    const LossFunction& loss = *inst.loss;
    advrisk::DualityGapReport cls = advrisk::duality_gap(
        inst.dist, eps, inst.scene, nullptr,
        inst.value_grid.value_or(std::vector<ExtReal>{}), budgets.enumeration(inst),
        budgets.dual(inst));
    advrisk::DualityGapReport sur = advrisk::duality_gap(
        inst.dist, eps, inst.scene, &loss,
        inst.value_grid.value_or(std::vector<ExtReal>{}), budgets.enumeration(inst),
        budgets.dual(inst));
    bool certified = cls.gap <= 1e-9 && sur.gap <= 1e-9 &&
                     std::fabs(cls.primal - sur.primal) <= 1e-9;
    advrisk::SplitMix64 gen(mb_seed);
    double max_violation = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < mb_trials; ++t) {
      std::vector<ExtReal> vals;
      vals.reserve(inst.scene->size());
      for (std::size_t i = 0; i < inst.scene->size(); ++i)
        vals.push_back(advrisk::random_classifier_value(gen));
      advrisk::TabulatedClassifier f(inst.scene, std::move(vals));
      double r0 = advrisk::adversarial_classification_risk(inst.dist, f, eps);
      double rr = advrisk::adversarial_surrogate_risk(inst.dist, f, loss, eps).raw();
      max_violation = std::max(max_violation, r0 - rr);
    }
    json out;
    out["inf_zero_one"] = cls.primal;
    out["inf_rho_margin"] = sur.primal;
    out["dual"] = cls.dual;
    out["gap_zero_one"] = cls.gap;
    out["gap_rho_margin"] = sur.gap;
    out["inf_equality_certified"] = certified;
    if (!certified) out["message"] = "bound unverified on this instance";
    out["trials"] = mb_trials;
    out["seed"] = mb_seed;
    if (mb_trials > 0) out["max_violation"] = num_or_inf(max_violation);
    emit(out);
    return 0;
  }

  if (slack->parsed()) {
    if (!inst.loss)
      throw std::invalid_argument("slackness: instance must carry a loss");
    const LossFunction& loss = *inst.loss;
    std::size_t n_atoms = inst.dist.p0.atoms().size() + inst.dist.p1.atoms().size();
    advrisk::DualCandidate cand =
        sl_merge_at ? advrisk::dual_candidate_from_assignment(
                          inst.dist, eps, inst.scene,
                          std::vector<std::size_t>(n_atoms, *sl_merge_at), &loss)
                    : advrisk::maximize_dual(inst.dist, eps, inst.scene, &loss,
                                             budgets.dual(inst));
    auto scene = inst.scene;
    const auto family = [scene](long n) {
      return advrisk::counterexample_classifier(scene, n);
    };
    std::vector<advrisk::SlacknessRow> rows = advrisk::slackness_report(
        inst.dist, eps, loss, family, parse_n_list(sl_nlist), cand);
    json out;
    out["candidate"] = candidate_to_json(cand, inst.dist.p0.atoms().size());
    out["slackness"] = slackness_rows_to_json(rows);
    emit(out);
    if (!csv_path.empty()) {
      std::vector<std::vector<std::string>> csv_rows;
      for (const auto& r : rows)
        csv_rows.push_back({std::to_string(r.n),
                            fmt(r.surrogate_conditional_residual),
                            fmt(r.surrogate_transport_residual_p1),
                            fmt(r.surrogate_transport_residual_p0),
                            fmt(r.classification_conditional_residual),
                            fmt(r.classification_transport_residual_p1),
                            fmt(r.classification_transport_residual_p0)});
      write_csv(csv_path,
                {"n", "surrogate_conditional_residual", "surrogate_transport_residual_p1",
                 "surrogate_transport_residual_p0", "classification_conditional_residual",
                 "classification_transport_residual_p1",
                 "classification_transport_residual_p0"},
                csv_rows);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const advrisk::budget_error& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
