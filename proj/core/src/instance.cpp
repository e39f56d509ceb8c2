#include "sopcc/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "sopcc/errors.hpp"

namespace sopcc {

void Instance::validate() const {
  if (n < 2) throw InvalidInstanceError("instance needs at least 2 vertices");
  if (static_cast<int>(coords.size()) != n) throw InvalidInstanceError("coords size mismatch");
  if (static_cast<int>(rewards.size()) != n) throw InvalidInstanceError("rewards size mismatch");
  if (lengths.rows() != n || lengths.cols() != n) throw InvalidInstanceError("lengths shape mismatch");
  if (startVertex < 0 || startVertex >= n || goalVertex < 0 || goalVertex >= n)
    throw InvalidInstanceError("start/goal vertex out of range");
  if (!(budget > 0.0)) throw InvalidInstanceError("budget must be positive");
  if (!(failureBound > 0.0 && failureBound < 1.0))
    throw InvalidInstanceError("failure bound must lie in (0, 1)");
  for (double r : rewards)
    if (!(r >= 0.0)) throw InvalidInstanceError("rewards must be nonnegative");
  for (int i = 0; i < n; ++i) {
    if (lengths(i, i) != 0.0) throw InvalidInstanceError("lengths diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (lengths(i, j) != lengths(j, i)) throw InvalidInstanceError("lengths must be symmetric");
      if (!(lengths(i, j) > 0.0))
        throw InvalidInstanceError("off-diagonal lengths must be strictly positive");
    }
  }
  if (costModel != "exponential")
    throw InvalidInstanceError("unsupported cost model: " + costModel);
}

Instance generateInstance(int n, double budget, double failureBound, Rng& rng) {
  if (n < 2) throw InvalidInstanceError("generateInstance requires n >= 2");
  Instance inst;
  inst.n = n;
  inst.budget = budget;
  inst.failureBound = failureBound;
  inst.coords.resize(n);
  inst.rewards.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.coords[i] = {rng.uniform(), rng.uniform()};
    inst.rewards[i] = rng.uniform();
  }
  inst.lengths.resize(n, n);
  for (int i = 0; i < n; ++i) {
    inst.lengths(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double dx = inst.coords[i].first - inst.coords[j].first;
      const double dy = inst.coords[i].second - inst.coords[j].second;
      const double d = std::sqrt(dx * dx + dy * dy);
      inst.lengths(i, j) = d;
      inst.lengths(j, i) = d;
    }
  }
  inst.startVertex = rng.uniformInt(n);
  inst.goalVertex = rng.uniformInt(n - 1);
  if (inst.goalVertex >= inst.startVertex) ++inst.goalVertex;
  inst.validate();  // rejects coincident points (zero-length edge)
  return inst;
}

double sampleEdgeCost(const Instance& inst, int i, int j, Rng& rng) {
  if (i == j) throw InvalidPathError("self-loop edge has no cost model");
  return rng.exponential(inst.lengths(i, j));
}

double pathCostSample(const Instance& inst, const std::vector<int>& path, Rng& rng) {
  std::unordered_set<int> seen;
  for (std::size_t k = 0; k < path.size(); ++k) {
    // the two ends may coincide (v_s = v_g); interior repeats are invalid
    const bool closingLoop = k + 1 == path.size() && path[k] == path[0] && k > 0;
    if (!closingLoop && !seen.insert(path[k]).second)
      throw InvalidPathError("path repeats a vertex");
  }
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k)
    total += sampleEdgeCost(inst, path[k], path[k + 1], rng);
  return total;
}

std::string instanceToJson(const Instance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  auto coords = nlohmann::json::array();
  for (const auto& [x, y] : inst.coords) coords.push_back({x, y});
  j["coords"] = std::move(coords);
  j["rewards"] = inst.rewards;
  j["start"] = inst.startVertex;
  j["goal"] = inst.goalVertex;
  j["budget"] = inst.budget;
  j["p_f"] = inst.failureBound;
  j["cost_model"] = inst.costModel;
  auto lengths = nlohmann::json::array();
  for (int i = 0; i < inst.n; ++i) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < inst.n; ++k) row.push_back(inst.lengths(i, k));
    lengths.push_back(std::move(row));
  }
  j["lengths"] = std::move(lengths);
  return j.dump();
}

Instance instanceFromJson(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  Instance inst;
  inst.n = j.at("n").get<int>();
  for (const auto& c : j.at("coords")) inst.coords.emplace_back(c.at(0), c.at(1));
  inst.rewards = j.at("rewards").get<std::vector<double>>();
  inst.startVertex = j.at("start").get<int>();
  inst.goalVertex = j.at("goal").get<int>();
  inst.budget = j.at("budget").get<double>();
  inst.failureBound = j.at("p_f").get<double>();
  inst.costModel = j.value("cost_model", std::string("exponential"));
  inst.lengths.resize(inst.n, inst.n);
  if (j.contains("lengths")) {
    const auto& rows = j.at("lengths");
    for (int i = 0; i < inst.n; ++i)
      for (int k = 0; k < inst.n; ++k) inst.lengths(i, k) = rows.at(i).at(k).get<double>();
  } else {
    // lengths omitted: Euclidean from coords
    for (int i = 0; i < inst.n; ++i)
      for (int k = 0; k < inst.n; ++k) {
        const double dx = inst.coords[i].first - inst.coords[k].first;
        const double dy = inst.coords[i].second - inst.coords[k].second;
        inst.lengths(i, k) = std::sqrt(dx * dx + dy * dy);
      }
  }
  inst.validate();
  return inst;
}

void saveInstance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << instanceToJson(inst) << '\n';
}

Instance loadInstance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return instanceFromJson(ss.str());
}

}  // namespace sopcc
