#include "simsec/nn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace simsec::nn {

namespace {

using nlohmann::json;

json network_to_json(const NetworkConfig& c) {
  return json{{"obs_dim", c.obs_dim},         {"action_dim", c.action_dim},
              {"history", c.history},         {"hidden", c.hidden},
              {"lstm_layers", c.lstm_layers}, {"heads", c.heads},
              {"use_bilstm", c.use_bilstm},   {"use_mhsa", c.use_mhsa},
              {"init_log_std", c.init_log_std}, {"mean_init_scale", c.mean_init_scale}};
}

NetworkConfig network_from_json(const json& j) {
  NetworkConfig c;
  c.obs_dim = j.at("obs_dim").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.history = j.at("history").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.lstm_layers = j.at("lstm_layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.use_bilstm = j.at("use_bilstm").get<bool>();
  c.use_mhsa = j.at("use_mhsa").get<bool>();
  c.init_log_std = j.at("init_log_std").get<double>();
  c.mean_init_scale = j.at("mean_init_scale").get<double>();
  return c;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  return j;
}

void fill_store(const json& j, ParameterStore& store, const std::string& path) {
  const json& params = j.at("parameters");
  if (params.size() != store.size()) throw std::runtime_error("parameter count mismatch in " + path);
  std::size_t idx = 0;
  for (Parameter& p : store.entries()) {
    const json& e = params.at(idx++);
    if (e.at("name").get<std::string>() != p.name || e.at("rows").get<Eigen::Index>() != p.value.rows() ||
        e.at("cols").get<Eigen::Index>() != p.value.cols()) {
      throw std::runtime_error("parameter " + p.name + " does not match checkpoint " + path);
    }
    const std::vector<double> data = e.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != p.value.size()) {
      throw std::runtime_error("parameter " + p.name + " has wrong element count");
    }
    p.value = Eigen::Map<const Eigen::MatrixXd>(data.data(), p.value.rows(), p.value.cols());
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ActorCritic& net) {
  json j;
  j["version"] = kCheckpointVersion;
  j["network"] = network_to_json(net.config());
  json params = json::array();
  for (const Parameter& p : net.params().entries()) {
    params.push_back({{"name", p.name},
                      {"rows", p.value.rows()},
                      {"cols", p.value.cols()},
                      {"data", std::vector<double>(p.value.data(), p.value.data() + p.value.size())}});
  }
  j["parameters"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

std::unique_ptr<ActorCritic> load_checkpoint(const std::string& path) {
  const json j = read_json(path);
  auto net = std::make_unique<ActorCritic>(network_from_json(j.at("network")), 0);
  fill_store(j, net->params(), path);
  return net;
}

void load_parameters(const std::string& path, ParameterStore& store) {
  fill_store(read_json(path), store, path);
}

}  // namespace simsec::nn
