#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "odyssey/models/gmm.hpp"

namespace odyssey {

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// gmm-v1 text format:
//
//   gmm-v1
//   dim <d>
//   image <C> <H> <W>                      (optional)
//   component <weight> <tau> <m_1> ... <m_d>
//   context <name> <w_1> ... <w_K>         (optional; defaults to one
//                                           "default" context from the
//                                           component weights)
//
// Blank lines and lines starting with '#' are ignored.
inline GmmModel parse_gmm(std::istream& in, const std::string& source = "<stream>") {
  auto fail = [&](int line, const std::string& msg) -> void {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
  };

  std::string first;
  int lineno = 0;
  while (std::getline(in, first)) {
    ++lineno;
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first.empty() || first[0] == '#') continue;
    break;
  }
  if (first != "gmm-v1") fail(lineno, "expected 'gmm-v1' header");

  int dim = -1;
  std::optional<SyntheticImageSpec> image;
  std::vector<GmmComponent> components;
  std::vector<std::string> context_names;
  std::vector<Vec> context_weights;

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim") {
      if (!(ls >> dim) || dim < 1) fail(lineno, "dim: expected a positive integer");
    } else if (key == "image") {
      SyntheticImageSpec s;
      if (!(ls >> s.channels >> s.height >> s.width) || s.channels < 1 || s.height < 1 ||
          s.width < 1)
        fail(lineno, "image: expected three positive integers C H W");
      image = s;
    } else if (key == "component") {
      if (dim < 1) fail(lineno, "component before dim");
      GmmComponent c;
      if (!(ls >> c.weight >> c.tau)) fail(lineno, "component: expected '<weight> <tau> <means...>'");
      c.mean.resize(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i)
        if (!(ls >> c.mean[static_cast<std::size_t>(i)]))
          fail(lineno, "component: expected " + std::to_string(dim) + " mean coordinates");
      components.push_back(std::move(c));
    } else if (key == "context") {
      std::string name;
      if (!(ls >> name)) fail(lineno, "context: expected a name");
      Vec w(components.size());
      for (std::size_t i = 0; i < w.size(); ++i)
        if (!(ls >> w[i]))
          fail(lineno, "context: expected " + std::to_string(components.size()) + " weights");
      double extra;
      if (ls >> extra) fail(lineno, "context: too many weights");
      context_names.push_back(name);
      context_weights.push_back(std::move(w));
    } else {
      fail(lineno, "unknown key '" + key + "'");
    }
  }
  if (components.empty()) fail(lineno, "no components declared");

  return GmmModel(std::move(components), std::move(context_names), std::move(context_weights),
                  image);
}

inline GmmModel load_gmm(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open model file '" + path + "'");
  return parse_gmm(f, path);
}

inline void serialize_gmm(const GmmModel& model, std::ostream& out) {
  out << "gmm-v1\n";
  out << "dim " << model.dimension() << "\n";
  if (model.image_spec()) {
    const auto& s = *model.image_spec();
    out << "image " << s.channels << " " << s.height << " " << s.width << "\n";
  }
  for (const auto& c : model.components()) {
    out << "component " << detail::format_double(c.weight) << " " << detail::format_double(c.tau);
    for (double m : c.mean) out << " " << detail::format_double(m);
    out << "\n";
  }
  for (int i = 0; i < model.context_count(); ++i) {
    out << "context " << model.context_names()[static_cast<std::size_t>(i)];
    for (double w : model.context_weights(i)) out << " " << detail::format_double(w);
    out << "\n";
  }
}

inline void save_gmm(const GmmModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write model file '" + path + "'");
  serialize_gmm(model, f);
}

}  // namespace odyssey
