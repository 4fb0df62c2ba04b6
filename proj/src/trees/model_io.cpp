#include "jamflow/trees/model_io.hpp"

#include <fstream>
#include <sstream>

#include "jamflow/errors.hpp"

namespace jamflow::trees {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json config_to_json(TrainConfig const& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"max_leaves", c.max_leaves},
          {"learning_rate", c.learning_rate},
          {"lambda", c.lambda},
          {"gamma", c.gamma},
          {"min_child_weight", c.min_child_weight},
          {"max_bins", c.max_bins},
          {"subsample_rows", c.subsample_rows},
          {"subsample_features", c.subsample_features},
          {"bootstrap", c.bootstrap},
          {"seed", c.seed},
          {"n_partitions", c.n_partitions}};
}

TrainConfig config_from_json(json const& j, TrainConfig c) {
  if (!j.is_object()) {
    throw ConfigError{"training config must be a JSON object"};
  }
  try {
    auto const read = [&](char const* key, auto& field) {
      if (auto const it = j.find(key); it != j.end()) {
        field = it->get<std::decay_t<decltype(field)>>();
      }
    };
    read("n_trees", c.n_trees);
    read("max_depth", c.max_depth);
    read("max_leaves", c.max_leaves);
    read("learning_rate", c.learning_rate);
    read("lambda", c.lambda);
    read("gamma", c.gamma);
    read("min_child_weight", c.min_child_weight);
    read("max_bins", c.max_bins);
    read("subsample_rows", c.subsample_rows);
    read("subsample_features", c.subsample_features);
    read("bootstrap", c.bootstrap);
    read("seed", c.seed);
    read("n_workers", c.n_workers);
    read("n_partitions", c.n_partitions);
  } catch (json::exception const& e) {
    throw ConfigError{std::string{"bad training config: "} + e.what()};
  }
  return c;
}

ordered_json model_to_json(Ensemble const& m, std::string const& manifest) {
  ordered_json trees = ordered_json::array();
  for (auto const& t : m.trees) {
    ordered_json nodes = ordered_json::array();
    for (auto const& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"bin", n.bin_threshold},
                         {"threshold", n.threshold},
                         {"missing_left", n.missing_goes_left},
                         {"left", n.left},
                         {"right", n.right},
                         {"gain", n.gain}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"format", "jamflow-model"},
          {"version", kModelFormatVersion},
          {"kind", to_string(m.kind)},
          {"manifest", manifest},
          {"schema",
           {{"feature_set", to_string(m.schema.feature_set)},
            {"features", m.schema.feature_names},
            {"fingerprint", m.schema.fingerprint}}},
          {"config", config_to_json(m.config)},
          {"base_margin", m.base_margin},
          {"learning_rate", m.learning_rate},
          {"bin_edges", m.bin_edges},
          {"trees", std::move(trees)}};
}

Ensemble model_from_json(json const& j) {
  try {
    if (j.at("format") != "jamflow-model") {
      throw ValidationError{"not a jamflow model document"};
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ValidationError{"unsupported model format version"};
    }
    Ensemble m;
    auto const kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) {
      throw ValidationError{"unknown model kind"};
    }
    m.kind = *kind;
    auto const& schema = j.at("schema");
    m.schema.feature_names = schema.at("features").get<std::vector<std::string>>();
    m.schema.fingerprint = schema.at("fingerprint").get<std::string>();
    m.schema.feature_set =
        parse_feature_set(schema.at("feature_set").get<std::string>()).value_or(FeatureSet::kCustom);
    m.config = config_from_json(j.at("config"));
    m.base_margin = j.at("base_margin").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.bin_edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
    auto const nf = m.schema.feature_names.size();
    for (auto const& jt : j.at("trees")) {
      DecisionTree t;
      for (auto const& jn : jt.at("nodes")) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.value = jn["leaf"].get<double>();
        } else {
          n.feature = jn.at("feature").get<std::uint32_t>();
          n.bin_threshold = jn.at("bin").get<BinIndex>();
          n.threshold = jn.at("threshold").get<double>();
          n.missing_goes_left = jn.at("missing_left").get<bool>();
          n.left = jn.at("left").get<std::int32_t>();
          n.right = jn.at("right").get<std::int32_t>();
          n.gain = jn.at("gain").get<double>();
        }
        t.nodes.push_back(n);
      }
      // Children must point forward so traversal terminates.
      for (std::size_t i = 0; i != t.nodes.size(); ++i) {
        auto const& n = t.nodes[i];
        if (!n.is_leaf() &&
            (n.feature >= nf || n.left <= static_cast<std::int32_t>(i) ||
             n.right <= static_cast<std::int32_t>(i) ||
             static_cast<std::size_t>(std::max(n.left, n.right)) >= t.nodes.size())) {
          throw ValidationError{"malformed tree node " + std::to_string(i)};
        }
      }
      if (t.nodes.empty()) {
        throw ValidationError{"tree without nodes"};
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (json::exception const& e) {
    throw ValidationError{std::string{"malformed model document: "} + e.what()};
  }
}

std::string serialize_model(Ensemble const& model, std::string const& manifest) {
  return model_to_json(model, manifest).dump(1) + "\n";
}

void write_model(std::filesystem::path const& path, Ensemble const& model,
                 std::string const& manifest) {
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw_io("cannot create", path.string());
  }
  out << serialize_model(model, manifest);
  if (!out.flush()) {
    throw_io("write failed", path.string());
  }
}

Ensemble read_model(std::filesystem::path const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw_io("cannot open", path.string());
  }
  auto const j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw ValidationError{"model file '" + path.string() + "' is not valid JSON"};
  }
  return model_from_json(j);
}

}  // namespace jamflow::trees
