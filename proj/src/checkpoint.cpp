#include "ufcnn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "ufcnn/errors.hpp"

namespace ufcnn {

using nlohmann::json;

void save_checkpoint(const Network& net, const std::string& path) {
  const NetworkConfig& cfg = net.config();
  json j;
  j["format"] = kCheckpointFormat;
  j["config"] = {{"variant", to_string(cfg.variant)},
                 {"levels", cfg.levels},
                 {"filters", cfg.filters},
                 {"kernel_len", cfg.kernel_len},
                 {"in_channels", cfg.in_channels},
                 {"out_channels", cfg.out_channels},
                 {"loss", to_string(cfg.loss)}};
  json params = json::object();
  for (const auto& ref : net.layers()) {
    params[ref.name + ".weights"] = ref.layer->weights;
    params[ref.name + ".bias"] = ref.layer->bias;
  }
  j["params"] = std::move(params);

  std::ofstream out(path);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  out << j.dump() << "\n";
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kCheckpointFormat)
    throw DataError("checkpoint " + path + ": missing or unsupported format tag");

  const json& jc = j.at("config");
  NetworkConfig cfg;
  try {
    cfg.variant = variant_from_string(jc.at("variant").get<std::string>());
    cfg.levels = jc.at("levels").get<int>();
    cfg.filters = jc.at("filters").get<int>();
    cfg.kernel_len = jc.at("kernel_len").get<int>();
    cfg.in_channels = jc.at("in_channels").get<int>();
    cfg.out_channels = jc.at("out_channels").get<int>();
    cfg.loss = loss_kind_from_string(jc.at("loss").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path + ": bad config: " + e.what());
  }

  Network net = build_network(cfg, 0);
  const json& params = j.at("params");
  for (auto& ref : net.layers()) {
    for (const char* part : {".weights", ".bias"}) {
      const std::string key = ref.name + part;
      if (!params.contains(key))
        throw DataError("checkpoint " + path + ": missing array " + key);
      std::vector<double> values = params.at(key).get<std::vector<double>>();
      std::vector<double>& dst =
          part[1] == 'w' ? ref.layer->weights : ref.layer->bias;
      if (values.size() != dst.size())
        throw DataError("checkpoint " + path + ": array " + key + " has " +
                        std::to_string(values.size()) + " values, expected " +
                        std::to_string(dst.size()));
      dst = std::move(values);
    }
  }
  return net;
}

}  // namespace ufcnn
