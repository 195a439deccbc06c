#include "qdob/serialization.hpp"

#include <cmath>

namespace qdob {

json matrix_to_json(const Mat& m) {
  json entries = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      entries.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
  return entries;
}

Mat matrix_from_json(const json& j, int rows, int cols) {
  require(j.is_array() && static_cast<long>(j.size()) == static_cast<long>(rows) * cols,
          "matrix json: wrong entry count");
  Mat m(rows, cols);
  long idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int jj = 0; jj < cols; ++jj) {
      const json& e = j[idx++];
      require(e.is_array() && e.size() == 2, "matrix json: entries must be [re, im]");
      m(i, jj) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

json channel_to_json(const QuantumChannel& phi) {
  json out;
  out["d"] = phi.dim();
  json kraus = json::array();
  for (const Mat& k : phi.kraus()) kraus.push_back(matrix_to_json(k));
  out["kraus"] = kraus;
  return out;
}

QuantumChannel channel_from_json(const json& j) {
  require(j.contains("d") && j.contains("kraus"), "channel json: need d and kraus");
  const int d = j.at("d").get<int>();
  std::vector<Mat> kraus;
  for (const json& k : j.at("kraus")) kraus.push_back(matrix_from_json(k, d, d));
  return QuantumChannel::from_kraus(std::move(kraus));
}

json label_to_json(const ChannelLabel& label) {
  json out;
  switch (label.kind) {
    case ChannelLabel::Kind::amplitude_damping:
      out["name"] = "amplitude_damping";
      out["gamma"] = label.gamma;
      break;
    case ChannelLabel::Kind::dephasing_z:
      out["name"] = "dephasing_z";
      break;
    case ChannelLabel::Kind::dephasing_x:
      out["name"] = "dephasing_x";
      break;
    case ChannelLabel::Kind::depolarizing:
      out["name"] = "depolarizing";
      out["p"] = label.p;
      out["d"] = label.d;
      break;
    case ChannelLabel::Kind::unitary:
      out["name"] = "unitary";
      out["d"] = label.d;
      out["matrix"] = matrix_to_json(label.unitary);
      break;
    case ChannelLabel::Kind::werner_holevo_like:
      out["name"] = "werner_holevo_like";
      out["d"] = label.d;
      break;
    case ChannelLabel::Kind::replacement:
      out["name"] = "replacement";
      out["d"] = label.d;
      out["tau"] = matrix_to_json(label.tau);
      break;
    case ChannelLabel::Kind::haar_random:
      out["name"] = "haar_random";
      out["d"] = label.d;
      out["kraus_rank"] = label.kraus_rank;
      break;
    case ChannelLabel::Kind::haar_unitary:
      out["name"] = "haar_unitary";
      out["d"] = label.d;
      break;
    case ChannelLabel::Kind::custom: {
      out["d"] = label.d;
      json kraus = json::array();
      for (const Mat& k : label.kraus) kraus.push_back(matrix_to_json(k));
      out["kraus"] = kraus;
      break;
    }
  }
  return out;
}

ChannelLabel label_from_json(const json& j) {
  if (j.contains("kraus") && !j.contains("name")) {
    const int d = j.at("d").get<int>();
    std::vector<Mat> kraus;
    for (const json& k : j.at("kraus")) kraus.push_back(matrix_from_json(k, d, d));
    return ChannelLabel::custom_kraus(std::move(kraus));
  }
  require(j.contains("name"), "label json: need name or kraus");
  std::string name = j.at("name").get<std::string>();
  if (name == "amplitude_damping") return ChannelLabel::amplitude_damping(j.at("gamma").get<double>());
  if (name == "dephasing_z") return ChannelLabel::dephasing_z();
  if (name == "dephasing_x") return ChannelLabel::dephasing_x();
  if (name == "depolarizing")
    return ChannelLabel::depolarizing(j.at("p").get<double>(), j.at("d").get<int>());
  if (name == "unitary") {
    const int d = j.at("d").get<int>();
    return ChannelLabel::unitary_conjugation(matrix_from_json(j.at("matrix"), d, d));
  }
  if (name == "werner_holevo_like") return ChannelLabel::werner_holevo_like(j.at("d").get<int>());
  if (name == "replacement") {
    const int d = j.at("d").get<int>();
    return ChannelLabel::replacement(matrix_from_json(j.at("tau"), d, d));
  }
  if (name == "haar_random")
    return ChannelLabel::haar_random_channel(j.at("d").get<int>(), j.at("kraus_rank").get<int>());
  if (name == "haar_unitary") return ChannelLabel::haar_unitary_channel(j.at("d").get<int>());
  throw std::invalid_argument("label json: unknown channel name '" + name + "'");
}

json sequence_to_json(const json& described) { return described; }

ChannelSequence sequence_from_json(const json& j) {
  require(j.contains("d"), "sequence json: need d");
  if (j.contains("rule")) {
    const json& rule = j.at("rule");
    std::string name = rule.at("name").get<std::string>();
    std::vector<QuantumChannel> channels;
    for (const json& c : rule.at("channels")) channels.push_back(make_named(label_from_json(c)));
    if (name == "constant") {
      require(channels.size() == 1, "sequence json: constant rule takes one channel");
      return ChannelSequence::constant(channels.front());
    }
    if (name == "cycle") return ChannelSequence::cycle(std::move(channels));
    throw std::invalid_argument("sequence json: unknown rule '" + name + "'");
  }
  require(j.contains("interval") && j.contains("channels"), "sequence json: need interval and channels");
  std::int64_t lo = j.at("interval")[0].get<std::int64_t>();
  std::int64_t hi = j.at("interval")[1].get<std::int64_t>();
  std::vector<QuantumChannel> channels;
  for (const json& c : j.at("channels")) channels.push_back(make_named(label_from_json(c)));
  require(static_cast<std::int64_t>(channels.size()) == hi - lo + 1,
          "sequence json: channel count must match interval");
  return ChannelSequence::from_list(lo, std::move(channels));
}

json base_to_json(const EnvironmentBase& base) {
  json out;
  out["d"] = base.d;
  out["seed"] = base.seed;
  json atoms = json::array();
  for (std::size_t i = 0; i < base.atoms.size(); ++i) {
    json a;
    a["channel"] = label_to_json(base.atoms[i]);
    if (base.kind == EnvironmentBase::Kind::iid) a["weight"] = base.weights[i];
    atoms.push_back(a);
  }
  out["atoms"] = atoms;
  switch (base.kind) {
    case EnvironmentBase::Kind::deterministic:
      out["kind"] = "deterministic";
      break;
    case EnvironmentBase::Kind::iid:
      out["kind"] = "iid";
      break;
    case EnvironmentBase::Kind::markov: {
      out["kind"] = "markov";
      json p = json::array();
      for (int i = 0; i < base.P.rows(); ++i) {
        json row = json::array();
        for (int jj = 0; jj < base.P.cols(); ++jj) row.push_back(base.P(i, jj));
        p.push_back(row);
      }
      out["P"] = p;
      json pi = json::array();
      for (int i = 0; i < base.pi.size(); ++i) pi.push_back(base.pi(i));
      out["pi"] = pi;
      break;
    }
  }
  return out;
}

EnvironmentBase base_from_json(const json& j) {
  require(j.contains("kind") && j.contains("atoms"), "base json: need kind and atoms");
  std::string kind = j.at("kind").get<std::string>();
  std::uint64_t seed = j.value("seed", 0ULL);
  std::vector<ChannelLabel> atoms;
  std::vector<double> weights;
  for (const json& a : j.at("atoms")) {
    atoms.push_back(label_from_json(a.at("channel")));
    if (a.contains("weight")) weights.push_back(a.at("weight").get<double>());
  }
  if (kind == "deterministic") {
    require(atoms.size() == 1, "base json: deterministic base takes one atom");
    return EnvironmentBase::deterministic_base(std::move(atoms.front()), seed);
  }
  if (kind == "iid") {
    if (weights.empty())
      weights.assign(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
    return EnvironmentBase::iid_base(std::move(atoms), std::move(weights), seed);
  }
  if (kind == "markov") {
    const int m = static_cast<int>(atoms.size());
    Eigen::MatrixXd p(m, m);
    const json& pj = j.at("P");
    for (int i = 0; i < m; ++i)
      for (int jj = 0; jj < m; ++jj) p(i, jj) = pj[i][jj].get<double>();
    Eigen::VectorXd pi(m);
    if (j.contains("pi")) {
      for (int i = 0; i < m; ++i) pi(i) = j.at("pi")[i].get<double>();
    } else {
      // left Perron vector of P
      Eigen::EigenSolver<Eigen::MatrixXd> es(p.transpose());
      int best = 0;
      for (int i = 1; i < m; ++i)
        if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = i;
      Eigen::VectorXd v = es.eigenvectors().col(best).real();
      pi = v.cwiseAbs() / v.cwiseAbs().sum();
    }
    return EnvironmentBase::markov_base(std::move(atoms), std::move(p), std::move(pi), seed);
  }
  throw std::invalid_argument("base json: unknown kind '" + kind + "'");
}

json chain_to_json(const MpsChain& chain) {
  json out;
  out["d_K"] = chain.physical_dim();
  out["D_H"] = chain.bond_dim();
  json sites = json::array();
  for (int n = 1; n <= chain.n_max(); ++n) {
    json site = json::array();
    for (const Mat& k : chain.site(n)) site.push_back(matrix_to_json(k));
    sites.push_back(site);
  }
  out["sites"] = sites;
  return out;
}

MpsChain chain_from_json(const json& j) {
  require(j.contains("d_K") && j.contains("D_H") && j.contains("sites"),
          "chain json: need d_K, D_H, sites");
  const int d_k = j.at("d_K").get<int>();
  const int d_h = j.at("D_H").get<int>();
  std::vector<std::vector<Mat>> sites;
  for (const json& s : j.at("sites")) {
    std::vector<Mat> tensors;
    for (const json& k : s) tensors.push_back(matrix_from_json(k, d_h, d_h));
    require(static_cast<int>(tensors.size()) == d_k, "chain json: tensor count mismatch");
    sites.push_back(std::move(tensors));
  }
  return MpsChain::from_sites(std::move(sites));
}

json observable_to_json(const LocalObservable& obs) {
  json out;
  out["support"] = json::array({obs.a, obs.b});
  out["matrix"] = matrix_to_json(obs.x);
  return out;
}

LocalObservable observable_from_json(const json& j, int d_k) {
  require(j.contains("support") && j.contains("matrix"), "observable json: need support and matrix");
  int a = j.at("support")[0].get<int>();
  int b = j.at("support")[1].get<int>();
  long long side = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(j.at("matrix").size()))));
  require(side * side == static_cast<long long>(j.at("matrix").size()),
          "observable json: matrix must be square");
  Mat x = matrix_from_json(j.at("matrix"), static_cast<int>(side), static_cast<int>(side));
  if (d_k > 0) return LocalObservable::on(a, b, std::move(x), d_k);
  require(1 <= a && a <= b, "observable json: bad support");
  return LocalObservable{a, b, std::move(x)};
}

}  // namespace qdob
