#include "fkc/arch.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "fkc/errors.hpp"

namespace fkc {

namespace {

std::string strip(const std::string& line) {
  std::string s = line;
  if (auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t parse_count(const std::string& token, const std::string& where) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(token, &pos);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got \"" + token + "\"");
  }
  if (pos != token.size())
    throw ConfigError(where + ": expected a number, got \"" + token + "\"");
  return static_cast<std::size_t>(v);
}

bool parse_flag(const std::string& token, const std::string& where) {
  if (token == "0") return false;
  if (token == "1") return true;
  throw ConfigError(where + ": expected 0 or 1, got \"" + token + "\"");
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  tokens.push_back(cur);
  return tokens;
}

}  // namespace

std::uint64_t ArchLayer::param_count() const { return param_count_at(k); }

std::uint64_t ArchLayer::param_count_at(std::size_t n) const {
  const std::uint64_t weights =
      static_cast<std::uint64_t>(c_out) * (c_in / groups) * n * n;
  return weights + (bias ? c_out : 0);
}

std::vector<std::string> ArchDescriptor::block_tags() const {
  std::vector<std::string> tags;
  for (const auto& layer : layers) {
    if (!layer.compressible) continue;
    if (std::find(tags.begin(), tags.end(), layer.block_tag) == tags.end())
      tags.push_back(layer.block_tag);
  }
  return tags;
}

ArchDescriptor parse_arch(std::istream& in, const std::string& origin) {
  ArchDescriptor desc;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip(raw);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);

    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "name") {
      ss >> desc.name;
      if (desc.name.empty()) throw ConfigError(where + ": name needs a value");
    } else if (key == "delta_mode") {
      std::string mode;
      ss >> mode;
      if (mode == "total")
        desc.compressible_only_delta = false;
      else if (mode == "compressible")
        desc.compressible_only_delta = true;
      else
        throw ConfigError(where + ": delta_mode must be total or compressible");
    } else if (key == "layer") {
      std::string id, tag, c_out, c_in, k, groups, bias, compressible;
      ss >> id >> tag >> c_out >> c_in >> k >> groups >> bias >> compressible;
      if (compressible.empty())
        throw ConfigError(where + ": layer rows need "
                          "id block c_out c_in k groups bias compressible");
      ArchLayer layer;
      layer.id = id;
      layer.block_tag = tag;
      layer.c_out = parse_count(c_out, where);
      layer.c_in = parse_count(c_in, where);
      layer.k = parse_count(k, where);
      layer.groups = parse_count(groups, where);
      layer.bias = parse_flag(bias, where);
      layer.compressible = parse_flag(compressible, where);
      if (layer.c_out == 0 || layer.c_in == 0 || layer.k == 0 || layer.groups == 0)
        throw ConfigError(where + ": counts must be positive");
      if (layer.c_in % layer.groups != 0 || layer.c_out % layer.groups != 0)
        throw ConfigError(where + ": channels are not divisible by groups");
      if (layer.compressible && layer.k < 2)
        throw ConfigError(where + ": a compressible layer needs k >= 2");
      desc.layers.push_back(std::move(layer));
    } else {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
  if (desc.name.empty()) throw ConfigError(origin + ": missing name");
  if (desc.layers.empty()) throw ConfigError(origin + ": no layer rows");
  return desc;
}

ArchDescriptor load_arch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open architecture descriptor: " + path.string());
  return parse_arch(in, path.string());
}

HarmonicConfig parse_config(const std::string& text, const ArchDescriptor& arch) {
  const std::vector<std::string> tokens = split_commas(text);
  if (tokens.size() == 1 && tokens[0].empty())
    throw ConfigError("empty harmonic configuration");

  bool repeat_notation = false;
  // (n, run length) per token; a bare number is a run of one.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  runs.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (token.empty()) throw ConfigError("empty token in configuration \"" + text + "\"");
    const auto x = token.find('x');
    if (x == std::string::npos) {
      runs.emplace_back(parse_count(token, "config token \"" + token + "\""), 1);
      continue;
    }
    repeat_notation = true;
    const std::size_t n = parse_count(token.substr(0, x), "config token \"" + token + "\"");
    const std::size_t count =
        parse_count(token.substr(x + 1), "config token \"" + token + "\"");
    if (count == 0) throw ConfigError("config token \"" + token + "\" repeats zero times");
    runs.emplace_back(n, count);
  }
  for (const auto& [n, count] : runs)
    if (n == 0) throw ConfigError("harmonic count must be positive in \"" + text + "\"");

  HarmonicConfig config;
  config.n_per_layer.assign(arch.layers.size(), 0);

  if (repeat_notation) {
    std::vector<std::size_t> expanded;
    for (const auto& [n, count] : runs) expanded.insert(expanded.end(), count, n);
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < arch.layers.size(); ++i)
      if (arch.layers[i].compressible) targets.push_back(i);
    if (expanded.size() != targets.size())
      throw ConfigError("configuration \"" + text + "\" covers " +
                        std::to_string(expanded.size()) + " layers but " + arch.name +
                        " has " + std::to_string(targets.size()) + " compressible layers");
    for (std::size_t i = 0; i < targets.size(); ++i)
      config.n_per_layer[targets[i]] = expanded[i];
  } else {
    const auto tags = arch.block_tags();
    if (runs.size() != tags.size())
      throw ConfigError("configuration \"" + text + "\" lists " +
                        std::to_string(runs.size()) + " blocks but " + arch.name +
                        " has " + std::to_string(tags.size()));
    std::unordered_map<std::string, std::size_t> by_tag;
    for (std::size_t i = 0; i < tags.size(); ++i) by_tag[tags[i]] = runs[i].first;
    for (std::size_t i = 0; i < arch.layers.size(); ++i)
      if (arch.layers[i].compressible)
        config.n_per_layer[i] = by_tag.at(arch.layers[i].block_tag);
  }

  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    if (config.n_per_layer[i] > arch.layers[i].k)
      throw ConfigError("layer " + arch.layers[i].id + " has k = " +
                        std::to_string(arch.layers[i].k) + ", cannot use n = " +
                        std::to_string(config.n_per_layer[i]));
  }
  return config;
}

ParamAccounting total_params(const ArchDescriptor& arch, const HarmonicConfig* config,
                             bool compressible_only) {
  if (config && config->n_per_layer.size() != arch.layers.size())
    throw ArgumentError("harmonic configuration does not match the descriptor");

  ParamAccounting acc;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const ArchLayer& layer = arch.layers[i];
    const std::uint64_t baseline = layer.param_count();
    acc.baseline_total += baseline;
    std::uint64_t current = baseline;
    if (layer.compressible) {
      acc.baseline_compressible += baseline;
      if (config) {
        const std::size_t n = config->n_per_layer[i];
        if (n == 0)
          throw ArgumentError("configuration does not cover compressible layer " + layer.id);
        if (n > layer.k)
          throw ArgumentError("layer " + layer.id + " has k = " + std::to_string(layer.k) +
                              ", cannot use n = " + std::to_string(n));
        current = layer.param_count_at(n);
      }
      acc.compressible += current;
    }
    acc.total += current;
  }

  const double base = static_cast<double>(compressible_only ? acc.baseline_compressible
                                                            : acc.baseline_total);
  const double now = static_cast<double>(compressible_only ? acc.compressible : acc.total);
  if (base > 0.0) {
    acc.remaining_pct = 100.0 * now / base;
    acc.reduction_pct = 100.0 - acc.remaining_pct;
  }
  return acc;
}

}  // namespace fkc
