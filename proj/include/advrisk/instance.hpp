#pragma once

#include <cstdlib>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "advrisk/classifiers.hpp"
#include "advrisk/extreal.hpp"
#include "advrisk/geometry.hpp"
#include "advrisk/losses.hpp"
#include "advrisk/measures.hpp"

namespace advrisk {

using json = nlohmann::json;

struct ClassifierSpec {
  std::string name;
  std::vector<ExtReal> values;  // aligned with scene point order
};

/// A problem instance as carried by the JSON file format.  Coordinates and
/// masses may be JSON numbers or decimal strings; both parse to binary floats
/// exactly once.  "inf" / "-inf" string literals denote infinities where
/// extended reals are allowed.
struct Instance {
  int dimension;
  Norm norm;
  double epsilon;
  std::shared_ptr<const Scene> scene;
  LabeledDistribution dist;
  std::optional<LossFunction> loss;
  std::vector<ClassifierSpec> classifiers;
  std::optional<std::vector<ExtReal>> value_grid;
  std::optional<unsigned long long> enumeration_budget;
  std::optional<unsigned long long> dual_budget;
};

namespace detail {

inline double parse_decimal(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      throw std::invalid_argument(std::string("instance: cannot parse decimal for ") + what +
                                  ": \"" + s + "\"");
    return v;
  }
  throw std::invalid_argument(std::string("instance: expected number or decimal string for ") + what);
}

inline ExtReal parse_ext_real(const json& j, const char* what) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return ExtReal::inf();
    if (s == "-inf") return ExtReal::neg_inf();
  }
  return ExtReal(parse_decimal(j, what));
}

inline json ext_real_to_json(ExtReal v) {
  if (v.is_pos_inf()) return json("inf");
  if (v.is_neg_inf()) return json("-inf");
  return json(v.raw());
}

inline Point parse_point(const json& j, int dimension, const char* what) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("instance: expected coordinate array for ") + what);
  Point p;
  p.reserve(j.size());
  for (const json& c : j) p.push_back(parse_decimal(c, what));
  if (p.size() != static_cast<std::size_t>(dimension))
    throw std::invalid_argument(std::string("instance: wrong coordinate count for ") + what);
  return p;
}

}  // namespace detail

inline LossFunction loss_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw std::invalid_argument("loss spec: expected an object with a \"family\" field");
  const std::string family = j.at("family").get<std::string>();
  if (family == "hinge") return LossFunction::hinge();
  if (family == "squared_hinge") return LossFunction::squared_hinge();
  if (family == "exponential") return LossFunction::exponential();
  if (family == "logistic") return LossFunction::logistic();
  if (family == "rho_margin")
    return LossFunction::rho_margin(detail::parse_decimal(j.at("rho"), "rho"));
  if (family == "shifted_sigmoid")
    return LossFunction::shifted_sigmoid(detail::parse_decimal(j.at("tau"), "tau"));
  if (family == "tabulated") {
    std::vector<LossKnot> knots;
    for (const json& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2)
        throw std::invalid_argument("loss spec: tabulated knots are [arg, value] pairs");
      knots.push_back({detail::parse_decimal(k[0], "knot arg"),
                       detail::parse_decimal(k[1], "knot value")});
    }
    if (j.contains("tail"))
      return LossFunction::tabulated(std::move(knots),
                                     detail::parse_decimal(j.at("tail"), "tail"));
    return LossFunction::tabulated(std::move(knots));
  }
  throw std::invalid_argument("loss spec: unknown family \"" + family + "\"");
}

inline json loss_to_json(const LossFunction& loss) {
  json j;
  j["family"] = loss.name();
  switch (loss.family()) {
    case LossFunction::Family::RhoMargin:
      j["rho"] = loss.rho();
      break;
    case LossFunction::Family::ShiftedSigmoid:
      j["tau"] = loss.tau();
      break;
    case LossFunction::Family::Tabulated: {
      json knots = json::array();
      for (const LossKnot& k : loss.knots()) knots.push_back({k.arg, k.value});
      j["knots"] = knots;
      j["tail"] = loss.tail();
      break;
    }
    default:
      break;
  }
  return j;
}

inline Instance parse_instance(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("instance: expected a JSON object");
  int dimension = j.at("dimension").get<int>();
  Norm norm = norm_from_string(j.at("norm").get<std::string>());
  double epsilon = detail::parse_decimal(j.at("epsilon"), "epsilon");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("instance: epsilon must be >= 0");

  std::vector<Point> points;
  for (const json& p : j.at("scene")) points.push_back(detail::parse_point(p, dimension, "scene point"));
  auto scene = make_scene(dimension, norm, std::move(points));

  const auto parse_measure = [&](const char* key) {
    std::vector<Atom> atoms;
    for (const json& a : j.at(key)) {
      atoms.push_back({detail::parse_point(a.at("location"), dimension, key),
                       detail::parse_decimal(a.at("mass"), "mass")});
    }
    return DiscreteMeasure(dimension, norm, std::move(atoms));
  };
  LabeledDistribution dist(parse_measure("p0"), parse_measure("p1"));
  for (const Atom& a : dist.p0.atoms())
    if (!scene->index_of(a.location))
      throw std::invalid_argument("instance: p0 atom location not in scene");
  for (const Atom& a : dist.p1.atoms())
    if (!scene->index_of(a.location))
      throw std::invalid_argument("instance: p1 atom location not in scene");

  std::optional<LossFunction> loss;
  if (j.contains("loss")) loss = loss_from_json(j.at("loss"));

  std::vector<ClassifierSpec> classifiers;
  if (j.contains("classifiers")) {
    for (const json& c : j.at("classifiers")) {
      ClassifierSpec spec;
      spec.name = c.at("name").get<std::string>();
      for (const json& v : c.at("values"))
        spec.values.push_back(detail::parse_ext_real(v, "classifier value"));
      if (spec.values.size() != scene->size())
        throw std::invalid_argument("instance: classifier \"" + spec.name +
                                    "\" needs one value per scene point");
      classifiers.push_back(std::move(spec));
    }
  }

  std::optional<std::vector<ExtReal>> grid;
  if (j.contains("value_grid")) {
    std::vector<ExtReal> g;
    for (const json& v : j.at("value_grid"))
      g.push_back(detail::parse_ext_real(v, "value_grid entry"));
    grid = std::move(g);
  }

  std::optional<unsigned long long> enum_budget, dual_budget;
  if (j.contains("budgets")) {
    const json& b = j.at("budgets");
    if (b.contains("enumeration")) enum_budget = b.at("enumeration").get<unsigned long long>();
    if (b.contains("dual")) dual_budget = b.at("dual").get<unsigned long long>();
  }

  return {dimension,        norm,           epsilon,     std::move(scene),
          std::move(dist),  std::move(loss), std::move(classifiers),
          std::move(grid),  enum_budget,    dual_budget};
}

inline Instance parse_instance(const std::string& text) {
  return parse_instance(json::parse(text));
}

inline json instance_to_json(const Instance& inst) {
  json j;
  j["dimension"] = inst.dimension;
  j["norm"] = to_string(inst.norm);
  j["epsilon"] = inst.epsilon;
  json scene = json::array();
  for (const Point& p : inst.scene->points()) scene.push_back(p);
  j["scene"] = scene;
  const auto measure_to_json = [](const DiscreteMeasure& m) {
    json out = json::array();
    for (const Atom& a : m.atoms()) out.push_back({{"location", a.location}, {"mass", a.mass}});
    return out;
  };
  j["p0"] = measure_to_json(inst.dist.p0);
  j["p1"] = measure_to_json(inst.dist.p1);
  if (inst.loss) j["loss"] = loss_to_json(*inst.loss);
  if (!inst.classifiers.empty()) {
    json cs = json::array();
    for (const ClassifierSpec& c : inst.classifiers) {
      json values = json::array();
      for (ExtReal v : c.values) values.push_back(detail::ext_real_to_json(v));
      cs.push_back({{"name", c.name}, {"values", values}});
    }
    j["classifiers"] = cs;
  }
  if (inst.value_grid) {
    json g = json::array();
    for (ExtReal v : *inst.value_grid) g.push_back(detail::ext_real_to_json(v));
    j["value_grid"] = g;
  }
  if (inst.enumeration_budget || inst.dual_budget) {
    json b;
    if (inst.enumeration_budget) b["enumeration"] = *inst.enumeration_budget;
    if (inst.dual_budget) b["dual"] = *inst.dual_budget;
    j["budgets"] = b;
  }
  return j;
}

inline std::string serialize_instance(const Instance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

}  // namespace advrisk
