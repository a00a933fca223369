#include "softq/mdp_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace softq {

using nlohmann::json;

TabularMdp two_state_mdp() {
  MdpSpec spec;
  spec.n_states = 2;
  spec.n_actions = 2;
  spec.transition = {Eigen::MatrixXd{{0.5, 0.5}, {0.9, 0.1}},
                     Eigen::MatrixXd{{0.6, 0.4}, {0.3, 0.7}}};
  spec.reward = {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
  spec.reward[0](0, 0) = 0.5;   // r(1,1,1)
  spec.reward[0](0, 1) = 1.0;   // r(1,1,2)
  spec.reward[1](0, 1) = -0.5;  // r(1,2,2)
  spec.reward[0](1, 1) = -0.5;  // r(2,1,2)
  spec.reward[1](1, 0) = -0.5;  // r(2,2,1)
  spec.discount = 0.9;
  spec.initial_distribution = Eigen::Vector2d{0.8, 0.2};
  return build_mdp(std::move(spec));
}

TabularMdp parse_mdp(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("mdp: ") + e.what());
  }
  try {
    MdpSpec spec;
    spec.n_states = doc.at("n_states").get<int>();
    spec.n_actions = doc.at("n_actions").get<int>();
    if (spec.n_states <= 0 || spec.n_actions <= 0) {
      throw ValidationError("mdp: state and action counts must be positive");
    }
    const auto& trans = doc.at("transitions");
    if (static_cast<int>(trans.size()) != spec.n_actions) {
      throw ValidationError("mdp: expected one transition matrix per action");
    }
    for (const auto& mat : trans) {
      Eigen::MatrixXd p(spec.n_states, spec.n_states);
      if (static_cast<int>(mat.size()) != spec.n_states) {
        throw ValidationError("mdp: transition matrix has wrong row count");
      }
      for (int s = 0; s < spec.n_states; ++s) {
        const auto& row = mat.at(s);
        if (static_cast<int>(row.size()) != spec.n_states) {
          throw ValidationError("mdp: transition row has wrong length");
        }
        for (int s2 = 0; s2 < spec.n_states; ++s2) p(s, s2) = row.at(s2).get<double>();
      }
      spec.transition.push_back(std::move(p));
    }
    spec.reward.assign(spec.n_actions, Eigen::MatrixXd::Zero(spec.n_states, spec.n_states));
    if (doc.contains("rewards")) {
      for (const auto& entry : doc.at("rewards")) {
        if (entry.size() != 4) {
          throw ValidationError("mdp: reward entries must be [s, a, s', value]");
        }
        const int s = entry.at(0).get<int>() - 1;   // file is 1-based
        const int a = entry.at(1).get<int>() - 1;
        const int s2 = entry.at(2).get<int>() - 1;
        if (s < 0 || s >= spec.n_states || a < 0 || a >= spec.n_actions || s2 < 0 ||
            s2 >= spec.n_states) {
          throw IndexOutOfRange("mdp: reward entry indices out of range");
        }
        spec.reward[a](s, s2) = entry.at(3).get<double>();
      }
    }
    spec.discount = doc.at("discount").get<double>();
    if (doc.contains("initial_distribution")) {
      const auto& init = doc.at("initial_distribution");
      spec.initial_distribution.resize(init.size());
      for (size_t i = 0; i < init.size(); ++i) {
        spec.initial_distribution[static_cast<Eigen::Index>(i)] = init.at(i).get<double>();
      }
    }
    if (doc.contains("strict_assumptions")) {
      spec.strict_assumptions = doc.at("strict_assumptions").get<bool>();
    }
    return build_mdp(std::move(spec));
  } catch (const json::exception& e) {
    throw ParseError(std::string("mdp: ") + e.what());
  }
}

std::string serialize_mdp(const TabularMdp& mdp) {
  json doc;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  json trans = json::array();
  for (int a = 0; a < mdp.n_actions(); ++a) {
    json mat = json::array();
    for (int s = 0; s < mdp.n_states(); ++s) {
      json row = json::array();
      for (int s2 = 0; s2 < mdp.n_states(); ++s2) row.push_back(mdp.transition(a)(s, s2));
      mat.push_back(std::move(row));
    }
    trans.push_back(std::move(mat));
  }
  doc["transitions"] = std::move(trans);
  json rewards = json::array();
  for (int a = 0; a < mdp.n_actions(); ++a) {
    for (int s = 0; s < mdp.n_states(); ++s) {
      for (int s2 = 0; s2 < mdp.n_states(); ++s2) {
        const double r = mdp.reward(s, a, s2);
        if (r != 0.0) rewards.push_back(json::array({s + 1, a + 1, s2 + 1, r}));
      }
    }
  }
  doc["rewards"] = std::move(rewards);
  doc["discount"] = mdp.discount();
  json init = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) init.push_back(mdp.initial_distribution()[s]);
  doc["initial_distribution"] = std::move(init);
  doc["strict_assumptions"] = mdp.strict_assumptions();
  return doc.dump(2) + "\n";
}

TabularMdp load_mdp(const std::string& path_or_builtin) {
  if (path_or_builtin == "builtin" || path_or_builtin == "builtin:two-state") {
    return two_state_mdp();
  }
  std::ifstream in(path_or_builtin);
  if (!in) throw IoError("cannot open MDP file: " + path_or_builtin);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mdp(ss.str());
}

void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write MDP file: " + path.string());
  out << serialize_mdp(mdp);
  if (!out) throw IoError("failed while writing MDP file: " + path.string());
}

}  // namespace softq
