// Copyright 2026 The BLISS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV / JSON dataset files.
//
// JSON nests instances under bags:
//   { "num_classes": 2, "regime": "binary-mil",
//     "bags": [ { "id": 0, "weak_label": {"kind": "binary", "value": 1},
//                 "instances": [ {"id": 0, "features": [..], "ground_truth": 1} ] } ] }
//
// CSV has one row per instance, preceded by a metadata comment line:
//   # num_classes=2 regime=binary-mil weak_label=binary
//   instance_id,bag_id,weak_label,ground_truth,f0,f1,...
// Label sets are written as "1;3;4", a missing ground truth as an empty field.

#ifndef BLISS_IO_HPP_
#define BLISS_IO_HPP_

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bliss/data.hpp"
#include "bliss/error.hpp"

namespace bliss {

enum class FileFormat { kCsv, kJson };

inline FileFormat format_from_string(std::string_view s) {
  if (s == "csv") return FileFormat::kCsv;
  if (s == "json") return FileFormat::kJson;
  throw ParameterError("unknown file format '" + std::string(s) + "'");
}

inline FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::kCsv : FileFormat::kJson;
}

namespace io_detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

enum class WeakKind { kBinary, kLabelSet, kProportion };

inline std::string_view kind_name(WeakKind k) {
  switch (k) {
    case WeakKind::kBinary: return "binary";
    case WeakKind::kLabelSet: return "label_set";
    case WeakKind::kProportion: return "proportion";
  }
  return "binary";
}

inline WeakKind kind_from_name(std::string_view s) {
  if (s == "binary") return WeakKind::kBinary;
  if (s == "label_set") return WeakKind::kLabelSet;
  if (s == "proportion") return WeakKind::kProportion;
  throw ParseError("unknown weak label kind '" + std::string(s) + "'");
}

inline WeakKind kind_of(const WeakLabel& w) {
  if (std::holds_alternative<BinaryBagLabel>(w)) return WeakKind::kBinary;
  if (std::holds_alternative<LabelSet>(w)) return WeakKind::kLabelSet;
  return WeakKind::kProportion;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::string encode_csv_weak_label(const WeakLabel& w) {
  if (const auto* b = std::get_if<BinaryBagLabel>(&w)) return b->positive ? "1" : "0";
  if (const auto* p = std::get_if<Proportion>(&w)) return format_double(p->value);
  std::string out;
  for (Label l : std::get<LabelSet>(w).labels) {
    if (!out.empty()) out += ';';
    out += std::to_string(l);
  }
  return out;
}

inline WeakLabel decode_csv_weak_label(std::string_view field, WeakKind kind, const std::string& where) {
  switch (kind) {
    case WeakKind::kBinary: {
      int v = 0;
      if (!parse_number(field, v) || (v != 0 && v != 1)) throw ParseError(where + ": binary weak label must be 0 or 1");
      return BinaryBagLabel{v == 1};
    }
    case WeakKind::kProportion: {
      double v = 0;
      if (!parse_number(field, v)) throw ParseError(where + ": bad proportion '" + std::string(field) + "'");
      return Proportion{v};
    }
    case WeakKind::kLabelSet: {
      LabelSet s;
      if (field.empty()) return s;
      for (auto part : split(field, ';')) {
        Label l = 0;
        if (!parse_number(part, l)) throw ParseError(where + ": bad label id '" + std::string(part) + "'");
        s.labels.insert(l);
      }
      return s;
    }
  }
  return BinaryBagLabel{};
}

inline WeakKind regime_weak_kind(Regime r) {
  switch (r) {
    case Regime::kBinaryMil: return WeakKind::kBinary;
    case Regime::kMulticlassMil: return WeakKind::kLabelSet;
    case Regime::kLlp: return WeakKind::kProportion;
    case Regime::kCustom: return WeakKind::kLabelSet;
  }
  return WeakKind::kBinary;
}

inline Dataset parse_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  std::vector<Instance> instances;
  std::vector<Bag> bags;
  int num_classes = 2;
  Regime regime = Regime::kBinaryMil;
  std::string where = "document";
  try {
    num_classes = doc.at("num_classes").get<int>();
    regime = regime_from_string(doc.at("regime").get<std::string>());
    const auto& jbags = doc.at("bags");
    for (std::size_t b = 0; b < jbags.size(); ++b) {
      where = "bags[" + std::to_string(b) + "]";
      const auto& jb = jbags[b];
      Bag bag;
      bag.id = jb.at("id").get<BagId>();
      const auto& jw = jb.at("weak_label");
      switch (kind_from_name(jw.at("kind").get<std::string>())) {
        case WeakKind::kBinary: {
          const auto& v = jw.at("value");
          int iv = v.is_boolean() ? (v.get<bool>() ? 1 : 0) : v.get<int>();
          if (iv != 0 && iv != 1) throw ParseError(where + ": binary weak label must be 0 or 1");
          bag.weak_label = BinaryBagLabel{iv == 1};
          break;
        }
        case WeakKind::kLabelSet:
          bag.weak_label = LabelSet{jw.at("value").get<std::set<Label>>()};
          break;
        case WeakKind::kProportion:
          bag.weak_label = Proportion{jw.at("value").get<double>()};
          break;
      }
      const auto& jinst = jb.at("instances");
      for (std::size_t i = 0; i < jinst.size(); ++i) {
        where = "bags[" + std::to_string(b) + "].instances[" + std::to_string(i) + "]";
        const auto& ji = jinst[i];
        Instance x;
        x.id = ji.at("id").get<InstanceId>();
        x.features = ji.at("features").get<std::vector<double>>();
        if (ji.contains("ground_truth") && !ji.at("ground_truth").is_null())
          x.ground_truth = ji.at("ground_truth").get<Label>();
        bag.instance_ids.push_back(x.id);
        instances.push_back(std::move(x));
      }
      bags.push_back(std::move(bag));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParseError(where + ": " + e.what());
  }
  // An instance listed under two bags shows up as a duplicate id.
  std::map<InstanceId, BagId> owner;
  for (const auto& bag : bags)
    for (InstanceId id : bag.instance_ids)
      if (auto [it, ok] = owner.emplace(id, bag.id); !ok)
        throw ValidationError("instance " + std::to_string(id) + " belongs to both bag " + std::to_string(it->second) +
                              " and bag " + std::to_string(bag.id));
  return Dataset(std::move(instances), std::move(bags), num_classes, regime);
}

inline std::string to_json_text(const Dataset& d) {
  nlohmann::json doc;
  doc["num_classes"] = d.num_classes();
  doc["regime"] = std::string(to_string(d.regime()));
  nlohmann::json jbags = nlohmann::json::array();
  for (const auto& bag : d.bags()) {
    nlohmann::json jb;
    jb["id"] = bag.id;
    nlohmann::json jw;
    jw["kind"] = std::string(kind_name(kind_of(bag.weak_label)));
    if (const auto* b = std::get_if<BinaryBagLabel>(&bag.weak_label)) jw["value"] = b->positive ? 1 : 0;
    else if (const auto* s = std::get_if<LabelSet>(&bag.weak_label)) jw["value"] = s->labels;
    else jw["value"] = std::get<Proportion>(bag.weak_label).value;
    jb["weak_label"] = jw;
    nlohmann::json jinst = nlohmann::json::array();
    for (InstanceId id : bag.instance_ids) {
      const auto& x = d.instance(id);
      nlohmann::json ji;
      ji["id"] = x.id;
      ji["features"] = x.features;
      ji["ground_truth"] = x.ground_truth ? nlohmann::json(*x.ground_truth) : nlohmann::json(nullptr);
      jinst.push_back(std::move(ji));
    }
    jb["instances"] = std::move(jinst);
    jbags.push_back(std::move(jb));
  }
  doc["bags"] = std::move(jbags);
  return doc.dump(1) + "\n";
}

inline Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int num_classes = -1;
  Regime regime = Regime::kBinaryMil;
  WeakKind kind = WeakKind::kBinary;
  bool have_kind = false;
  bool have_header = false;
  std::size_t dim = 0;
  std::vector<Instance> instances;
  std::map<BagId, Bag> bags;
  std::map<BagId, std::string> bag_label_text;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = "line " + std::to_string(line_no);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        try {
          if (key == "num_classes") {
            if (!parse_number(std::string_view(value), num_classes)) throw ParseError(where + ": bad num_classes");
          } else if (key == "regime") {
            regime = regime_from_string(value);
          } else if (key == "weak_label") {
            kind = kind_from_name(value);
            have_kind = true;
          }
        } catch (const ParameterError& e) {
          throw ParseError(where + ": " + e.what());
        }
      }
      continue;
    }
    auto fields = split(line, ',');
    if (!have_header) {
      if (fields.size() < 5 || fields[0] != "instance_id" || fields[1] != "bag_id" || fields[2] != "weak_label" ||
          fields[3] != "ground_truth")
        throw ParseError(where + ": expected header instance_id,bag_id,weak_label,ground_truth,f0,...");
      dim = fields.size() - 4;
      have_header = true;
      if (!have_kind) kind = regime_weak_kind(regime);
      continue;
    }
    if (fields.size() != dim + 4)
      throw ParseError(where + ": expected " + std::to_string(dim + 4) + " fields, got " + std::to_string(fields.size()));
    Instance x;
    BagId bag_id = 0;
    if (!parse_number(fields[0], x.id)) throw ParseError(where + ": bad instance_id");
    if (!parse_number(fields[1], bag_id)) throw ParseError(where + ": bad bag_id");
    if (!fields[3].empty()) {
      Label gt = 0;
      if (!parse_number(fields[3], gt)) throw ParseError(where + ": bad ground_truth");
      x.ground_truth = gt;
    }
    x.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
      if (!parse_number(fields[4 + j], x.features[j])) throw ParseError(where + ": bad feature f" + std::to_string(j));
    auto [it, fresh] = bags.try_emplace(bag_id);
    if (fresh) {
      it->second.id = bag_id;
      it->second.weak_label = decode_csv_weak_label(fields[2], kind, where);
      bag_label_text[bag_id] = std::string(fields[2]);
    } else if (bag_label_text[bag_id] != fields[2]) {
      throw ParseError(where + ": weak label differs from earlier rows of bag " + std::to_string(bag_id));
    }
    it->second.instance_ids.push_back(x.id);
    instances.push_back(std::move(x));
  }
  if (!have_header) throw ParseError("line " + std::to_string(line_no) + ": missing CSV header");
  if (num_classes < 0) num_classes = 2;
  std::vector<Bag> bag_list;
  for (auto& [id, bag] : bags) bag_list.push_back(std::move(bag));
  return Dataset(std::move(instances), std::move(bag_list), num_classes, regime);
}

inline std::string to_csv_text(const Dataset& d) {
  std::string out = "# num_classes=" + std::to_string(d.num_classes()) + " regime=" + std::string(to_string(d.regime()));
  if (!d.bags().empty()) out += " weak_label=" + std::string(kind_name(kind_of(d.bags().front().weak_label)));
  out += "\ninstance_id,bag_id,weak_label,ground_truth";
  for (std::size_t j = 0; j < d.feature_dim(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& bag : d.bags()) {
    const std::string label = encode_csv_weak_label(bag.weak_label);
    for (InstanceId id : bag.instance_ids) {
      const auto& x = d.instance(id);
      out += std::to_string(x.id) + ',' + std::to_string(bag.id) + ',' + label + ',';
      if (x.ground_truth) out += std::to_string(*x.ground_truth);
      for (double v : x.features) out += ',' + format_double(v);
      out += '\n';
    }
  }
  return out;
}

}  // namespace io_detail

inline Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("dataset file not found: " + path.string());
  const std::string text = io_detail::read_file(path);
  return format == FileFormat::kCsv ? io_detail::parse_csv(text) : io_detail::parse_json(text);
}

inline Dataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_from_path(path)); }

inline void save_dataset(const Dataset& dataset, const std::filesystem::path& path, FileFormat format) {
  if (dataset.feature_dim() == 0) throw ValidationError("cannot save a dataset with zero-dimensional features");
  const bool mixed = std::any_of(dataset.bags().begin(), dataset.bags().end(), [&](const Bag& b) {
    return io_detail::kind_of(b.weak_label) != io_detail::kind_of(dataset.bags().front().weak_label);
  });
  if (format == FileFormat::kCsv && mixed) throw ValidationError("CSV requires a single weak label kind per dataset");
  io_detail::write_file(path, format == FileFormat::kCsv ? io_detail::to_csv_text(dataset) : io_detail::to_json_text(dataset));
}

inline void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  save_dataset(dataset, path, format_from_path(path));
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, label] : gt) j[std::to_string(id)] = label;
  return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  try {
    for (const auto& [key, value] : j.items()) {
      InstanceId id = 0;
      if (!io_detail::parse_number(std::string_view(key), id)) throw ParseError("bad instance id key '" + key + "'");
      gt[id] = value.get<Label>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ground truth: ") + e.what());
  }
  return gt;
}

}  // namespace bliss

#endif  // BLISS_IO_HPP_
