#pragma once

#include "varsample/bounds.hpp"
#include "varsample/injectivity.hpp"
#include "varsample/recovery.hpp"
#include "varsample/sampling.hpp"
#include "varsample/types.hpp"
#include "varsample/varieties.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsample {

using json = nlohmann::json;

// -- canonical output ---------------------------------------------------------

namespace detail {

inline void write_canonical(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        write_canonical(it.value(), out);
      }
      out += '}';
      return;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_canonical(j[i], out);
      }
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default: out += j.dump();
  }
}

}  // namespace detail

/// Compact JSON with sorted keys and every float printed with 17 significant
/// digits; non-finite floats become null.
inline std::string canonical_dump(const json& j) {
  std::string out;
  detail::write_canonical(j, out);
  return out;
}

// -- elements -----------------------------------------------------------------

/// {"re": ..., "im": ...}; vectors as flat lists, matrices as lists of rows.
inline json element_to_json(const Element& x) {
  json re = json::array(), im = json::array();
  if (x.cols() == 1) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      re.push_back(x(i, 0).real());
      im.push_back(x(i, 0).imag());
    }
  } else {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      json rr = json::array(), ir = json::array();
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        rr.push_back(x(i, k).real());
        ir.push_back(x(i, k).imag());
      }
      re.push_back(rr);
      im.push_back(ir);
    }
  }
  return {{"re", re}, {"im", im}};
}

inline Element element_from_json(const json& j, const Shape& shape) {
  const json& re = j.at("re");
  const json im = j.contains("im") ? j.at("im") : json();
  Element x(shape.rows(), shape.cols());
  auto value = [](const json& part, std::size_t i, std::optional<std::size_t> k) {
    if (part.is_null()) return 0.0;
    return k ? part.at(i).at(*k).get<double>() : part.at(i).get<double>();
  };
  if (shape.is_vector()) {
    if (re.size() != static_cast<std::size_t>(shape.d)) throw ShapeError("vector entry count differs from d");
    for (int i = 0; i < shape.d; ++i) x(i, 0) = Complex(value(re, i, std::nullopt), value(im, i, std::nullopt));
  } else {
    if (re.size() != static_cast<std::size_t>(shape.d)) throw ShapeError("matrix row count differs from d");
    for (int i = 0; i < shape.d; ++i) {
      if (re.at(i).size() != static_cast<std::size_t>(shape.d)) throw ShapeError("matrix column count differs from d");
      for (int k = 0; k < shape.d; ++k) x(i, k) = Complex(value(re, i, k), value(im, i, k));
    }
  }
  return x;
}

// -- varieties, ensembles, samples ----------------------------------------------

inline json variety_to_json(const VarietySpec& w) {
  return {{"kind", to_string(w.kind())}, {"d", w.d()}, {"k_or_r", w.param()}, {"field", to_string(w.field())}};
}

inline VarietySpec variety_from_json(const json& j) {
  return VarietySpec(variety_kind_from_string(j.at("kind").get<std::string>()), j.at("d").get<int>(),
                     j.at("k_or_r").get<int>(), field_from_string(j.at("field").get<std::string>()));
}

inline json ensemble_to_json(const MeasurementEnsemble& e) {
  json ops = json::array();
  for (const auto& a : e.operators()) ops.push_back(element_to_json(a));
  json j = {{"field", to_string(e.field())},
            {"shape", to_string(e.shape().kind)},
            {"d", e.d()},
            {"m", e.m()},
            {"operators", ops}};
  if (e.ranks()) j["ranks"] = *e.ranks();
  if (e.seed()) j["seed"] = *e.seed();
  if (e.hermitian()) j["hermitian"] = true;
  return j;
}

inline MeasurementEnsemble ensemble_from_json(const json& j) {
  const Field field = field_from_string(j.at("field").get<std::string>());
  const std::string shape_name = j.at("shape").get<std::string>();
  const int d = j.at("d").get<int>();
  Shape shape;
  if (shape_name == "vector") {
    shape = Shape::vector(d);
  } else if (shape_name == "matrix") {
    shape = Shape::matrix(d);
  } else {
    throw std::invalid_argument("ensemble shape must be 'vector' or 'matrix', got '" + shape_name + "'");
  }
  std::vector<Element> ops;
  for (const auto& o : j.at("operators")) ops.push_back(element_from_json(o, shape));
  if (j.contains("m") && j.at("m").get<int>() != static_cast<int>(ops.size())) {
    throw std::invalid_argument("ensemble m differs from the operator count");
  }
  std::optional<std::vector<int>> ranks;
  if (j.contains("ranks")) ranks = j.at("ranks").get<std::vector<int>>();
  std::optional<std::uint64_t> seed;
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  const bool hermitian = j.value("hermitian", false);
  return MeasurementEnsemble(field, shape, std::move(ops), std::move(ranks), seed, hermitian);
}

inline json samples_to_json(const ComplexVector& y, const std::string& source) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    re.push_back(y(i).real());
    im.push_back(y(i).imag());
  }
  return {{"m", y.size()}, {"re", re}, {"im", im}, {"source", source}};
}

inline ComplexVector samples_from_json(const json& j) {
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.contains("im") ? j.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
  if (re.size() != im.size()) throw ShapeError("samples: re and im lengths differ");
  if (j.contains("m") && j.at("m").get<std::size_t>() != re.size()) throw ShapeError("samples: m differs from length");
  ComplexVector y(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) y(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
  return y;
}

// -- reports ------------------------------------------------------------------

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json bounds_to_json(const BoundsReport& b) {
  json j = {{"setting", b.setting}, {"d", b.d},           {"lower", b.lower},
            {"upper", b.upper},     {"regime", b.regime}, {"notes", b.notes}};
  j["exact"] = b.exact ? json(*b.exact) : json(nullptr);
  if (b.param) j["param"] = *b.param;
  if (b.field) j["field"] = to_string(*b.field);
  if (b.achievable) j["achievable"] = *b.achievable;
  if (b.codim_bad_set) j["codim_bad_set"] = *b.codim_bad_set;
  return j;
}

inline json verdict_to_json(const InjectivityVerdict& v) {
  json j = {{"status", to_string(v.status)},
            {"method", v.method},
            {"margin", optional_number(v.margin)},
            {"restarts", v.restarts_used},
            {"iterations", v.iterations},
            {"kernel_dimension", v.kernel_dimension},
            {"signal", variety_to_json(v.signal)},
            {"difference", variety_to_json(v.difference)}};
  j["config"] = {{"restarts", v.config.search.restarts},
                 {"max_iters", v.config.search.max_iters},
                 {"tol_feas", v.config.search.tol_feas},
                 {"margin_threshold", v.config.search.margin_threshold},
                 {"refine_iters", v.config.search.refine_iters},
                 {"seed", v.config.search.seed},
                 {"exact_tests", v.config.exact_tests}};
  if (v.witness) {
    j["witness"] = {{"element", element_to_json(v.witness->element)},
                    {"residual", v.witness->residual},
                    {"restart", v.witness->restart},
                    {"iterations", v.witness->iterations}};
  }
  if (v.collision) {
    j["collision"] = {{"x", element_to_json(v.collision->x)},
                      {"y", element_to_json(v.collision->y)},
                      {"gap", v.collision->gap},
                      {"distinct", v.collision->distinct}};
  }
  if (v.method == "complement_property" && v.status == Status::RefutedWithWitness) {
    j["failing_subset"] = v.failing_subset;
  }
  return j;
}

inline json outcome_to_json(const RecoveryOutcome& o) {
  return {{"estimate", element_to_json(o.estimate)},
          {"residual", o.residual},
          {"equivalence_distance", optional_number(o.equivalence_distance)},
          {"iterations", o.iterations},
          {"restarts", o.restarts},
          {"converged", o.converged},
          {"ambiguous", o.ambiguous}};
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "m,trials,successes,success_rate\n";
  for (const auto& r : rows) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.17g", r.success_rate());
    out << r.m << ',' << r.trials << ',' << r.successes << ',' << rate << '\n';
  }
  return out.str();
}

// -- files --------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace varsample
