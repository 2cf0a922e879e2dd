#include "sns/subnet.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "sns/error.hpp"

namespace sns {

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add:
      return "add";
    case ArithOp::Sub:
      return "sub";
    case ArithOp::Div:
      return "div";
    case ArithOp::Mul:
      return "mul";
  }
  return "?";
}

ArithOp parse_op(std::string_view name) {
  if (name == "add") return ArithOp::Add;
  if (name == "sub") return ArithOp::Sub;
  if (name == "div") return ArithOp::Div;
  if (name == "mul") return ArithOp::Mul;
  throw InvalidParameter("unknown arithmetic op '" + std::string(name) + "'");
}

double ideal_op(ArithOp op, double a, double b) {
  switch (op) {
    case ArithOp::Add:
      return std::clamp(a + b, 0.0, 20.0);
    case ArithOp::Sub:
      return std::clamp(a - b, 0.0, 20.0);
    case ArithOp::Div:
      return a / (1.0 + b);
    case ArithOp::Mul:
      return a * b / 20.0;
  }
  return 0.0;
}

LearnMask Topology::learn_mask() const {
  LearnMask m;
  m.w = w_mask;
  m.v = v_mask;
  m.w_sign = w_sign;
  m.tau.assign(static_cast<std::size_t>(n), true);
  m.b.assign(static_cast<std::size_t>(n), true);
  for (int c : inputs) {
    m.tau[static_cast<std::size_t>(c)] = false;
    m.b[static_cast<std::size_t>(c)] = false;
  }
  return m;
}

Topology build_topology(ArithOp op, std::uint64_t seed, double dt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> excitatory(5.0, 20.0);
  std::uniform_real_distribution<double> conductance(0.0, 20.0);

  Topology t;
  t.op = op;
  t.n = op == ArithOp::Mul ? 4 : 3;
  t.inputs = {0, 1};
  t.output = t.n - 1;
  t.w_mask = Mask::Constant(t.n, t.n, false);
  t.v_mask = Mask::Constant(t.n, t.n, false);
  t.w_sign.setZero(t.n, t.n);
  t.init_seed = seed;
  t.init = NetworkParams::zeros(t.n, dt);
  t.init.clamped = {0, 1};
  NetworkParams& p = t.init;
  const int out = t.output;

  switch (op) {
    case ArithOp::Add:
    case ArithOp::Sub:
      t.w_mask(out, 0) = t.w_mask(out, 1) = true;
      p.W(out, 0) = excitatory(rng);
      p.W(out, 1) = excitatory(rng);
      break;
    case ArithOp::Div:
      t.w_mask(out, 0) = true;
      t.v_mask(out, 1) = true;
      p.W(out, 0) = excitatory(rng);
      p.V(out, 1) = conductance(rng);
      break;
    case ArithOp::Mul: {
      const int inter = 2;
      t.w_mask(out, 0) = true;
      t.w_mask(inter, 1) = t.v_mask(inter, 1) = true;
      t.v_mask(out, inter) = true;
      p.W(out, 0) = excitatory(rng);
      p.W(inter, 1) = -excitatory(rng);
      p.V(inter, 1) = conductance(rng);
      p.V(out, inter) = conductance(rng);
      p.b[inter] = 20.0;  // tonically active until inhibited
      t.warmup = 1;
      break;
    }
  }
  p.mask = t.w_mask.array() || t.v_mask.array();
  for (int i = 0; i < t.n; ++i) {
    if (!p.is_clamped(i)) p.tau[i] = kSubnetInitTau;
  }
  p.validate();
  return t;
}

Topology build_topology(std::string_view op_name, std::uint64_t seed, double dt) {
  return build_topology(parse_op(op_name), seed, dt);
}

namespace {

NetworkParams three_neuron_base(double dt) {
  NetworkParams p = NetworkParams::zeros(3, dt);
  p.clamped = {0, 1};
  p.mask(2, 0) = p.mask(2, 1) = true;
  return p;
}

}  // namespace

NetworkParams exact_division_params(double dt) {
  NetworkParams p = three_neuron_base(dt);
  p.W(2, 0) = 20.0;
  p.V(2, 1) = 20.0;
  return p;
}

NetworkParams exact_subtraction_params(double dt) {
  NetworkParams p = three_neuron_base(dt);
  p.W(2, 0) = 20.0;
  p.W(2, 1) = -20.0;
  return p;
}

NetworkParams exact_addition_params(double dt) {
  NetworkParams p = three_neuron_base(dt);
  p.W(2, 0) = 20.0;
  p.W(2, 1) = 20.0;
  return p;
}

NetworkParams hand_multiplier_params(double gain, double dt) {
  // Interneuron: U_k = 20 (1 - b') / (1 + g b'), b' = U_b / 20.
  // Output:      U_out = c U_a / (1 + g phi_k) = U_a (b' + 1/g) for
  //              c = (1 + g) / g, i.e. a b / 20 plus an a / g residual.
  if (!(gain > 0.0)) throw InvalidParameter("hand_multiplier_params: gain must be > 0");
  NetworkParams p = NetworkParams::zeros(4, dt);
  p.clamped = {0, 1};
  p.mask(2, 1) = p.mask(3, 0) = p.mask(3, 2) = true;
  p.b[2] = 20.0;
  p.W(2, 1) = -20.0;
  p.V(2, 1) = gain;
  p.W(3, 0) = 20.0 * (1.0 + gain) / gain;
  p.V(3, 2) = gain;
  return p;
}

double steady_output(const NetworkParams& params, int output, double a,
                     double b, double tol, int max_iter) {
  const std::array<double, 2> in{a, b};
  const SteadyState ss = steady_state(params, in, tol, max_iter);
  return readout(ss.state.h[output], params.e_lo, params.e_hi);
}

Matrix eval_contour(const NetworkParams& params, int output, int grid_n) {
  if (grid_n < 2) throw InvalidParameter("eval_contour: grid_n must be >= 2");
  if (params.clamped.size() != 2) {
    throw InvalidParameter("eval_contour: network must have two clamped inputs");
  }
  Matrix grid(grid_n, grid_n);
  const double step = 20.0 / (grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double a = step * i;
      const double b = step * j;
      try {
        grid(i, j) = steady_output(params, output, a, b);
      } catch (const NonConvergence& e) {
        std::ostringstream msg;
        msg << "eval_contour: no steady state at (a=" << a << ", b=" << b
            << "): " << e.what();
        throw NonConvergence(msg.str(), e.residual());
      }
    }
  }
  return grid;
}

Matrix ideal_contour(ArithOp op, int grid_n) {
  if (grid_n < 2) throw InvalidParameter("ideal_contour: grid_n must be >= 2");
  Matrix grid(grid_n, grid_n);
  const double step = 20.0 / (grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) grid(i, j) = ideal_op(op, step * i, step * j);
  }
  return grid;
}

double contour_max_error(const NetworkParams& params, ArithOp op, int output,
                         int grid_n) {
  return (eval_contour(params, output, grid_n) - ideal_contour(op, grid_n))
      .cwiseAbs()
      .maxCoeff();
}

std::string contour_csv(const NetworkParams& params, ArithOp op, int output,
                        int grid_n) {
  const Matrix sns = eval_contour(params, output, grid_n);
  const Matrix ideal = ideal_contour(op, grid_n);
  const double step = 20.0 / (grid_n - 1);
  std::ostringstream out;
  out << "a,b,sns,ideal\n" << std::setprecision(17);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      out << step * i << ',' << step * j << ',' << sns(i, j) << ','
          << ideal(i, j) << '\n';
    }
  }
  return out.str();
}

std::string_view to_string(SynapseKind kind) {
  switch (kind) {
    case SynapseKind::Excitatory:
      return "excitatory";
    case SynapseKind::Inhibitory:
      return "inhibitory";
    case SynapseKind::Shunting:
      return "shunting";
    case SynapseKind::Silent:
      return "silent";
  }
  return "?";
}

std::vector<SynapseReport> classify_synapses(const NetworkParams& params) {
  std::vector<SynapseReport> out;
  for (int i = 0; i < params.n; ++i) {
    for (int j = 0; j < params.n; ++j) {
      if (!params.mask(i, j)) continue;
      SynapseKind kind = SynapseKind::Silent;
      if (params.W(i, j) > 0.0) {
        kind = SynapseKind::Excitatory;
      } else if (params.W(i, j) < 0.0) {
        kind = SynapseKind::Inhibitory;
      } else if (params.V(i, j) > 0.0) {
        kind = SynapseKind::Shunting;
      }
      out.push_back({j, i, kind});
    }
  }
  return out;
}

namespace {

nlohmann::json bool_matrix(const Mask& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<bool>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mask bool_matrix_from(const nlohmann::json& rows, int n) {
  Mask m = Mask::Constant(n, n, false);
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
    throw InvalidParameter("topology json: mask must be n x n");
  }
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
      throw InvalidParameter("topology json: mask must be n x n");
    }
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].get<bool>();
  }
  return m;
}

}  // namespace

std::string topology_to_json(const Topology& topo, const NetworkParams& params) {
  nlohmann::json doc = detail::params_json(params);
  nlohmann::json block;
  block["op"] = topo.name();
  block["inputs"] = std::vector<int>(topo.inputs.begin(), topo.inputs.end());
  block["output"] = topo.output;
  block["w_mask"] = bool_matrix(topo.w_mask);
  block["v_mask"] = bool_matrix(topo.v_mask);
  auto sign = nlohmann::json::array();
  for (int i = 0; i < topo.n; ++i) {
    auto row = nlohmann::json::array();
    for (int j = 0; j < topo.n; ++j) row.push_back(static_cast<int>(topo.w_sign(i, j)));
    sign.push_back(std::move(row));
  }
  block["w_sign"] = std::move(sign);
  block["warmup"] = topo.warmup;
  block["init_seed"] = topo.init_seed;
  doc["topology"] = std::move(block);
  return doc.dump(2);
}

namespace {

LoadedSubnet subnet_from(const nlohmann::json& doc) {
  LoadedSubnet out;
  out.params = detail::params_from(doc);
  try {
    const auto& block = doc.at("topology");
    Topology& t = out.topology;
    t.op = parse_op(block.at("op").get<std::string>());
    t.n = out.params.n;
    const auto inputs = block.at("inputs").get<std::vector<int>>();
    if (inputs.size() != 2) throw InvalidParameter("topology json: need two inputs");
    t.inputs = {inputs[0], inputs[1]};
    t.output = block.at("output").get<int>();
    if (t.output < 0 || t.output >= t.n) {
      throw InvalidParameter("topology json: output out of range");
    }
    t.w_mask = bool_matrix_from(block.at("w_mask"), t.n);
    t.v_mask = bool_matrix_from(block.at("v_mask"), t.n);
    t.w_sign.setZero(t.n, t.n);
    const auto& sign = block.at("w_sign");
    for (int i = 0; i < t.n; ++i) {
      for (int j = 0; j < t.n; ++j) {
        t.w_sign(i, j) = static_cast<signed char>(sign.at(i).at(j).get<int>());
      }
    }
    t.warmup = block.at("warmup").get<int>();
    t.init_seed = block.at("init_seed").get<std::uint64_t>();
    t.init = out.params;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("topology json: ") + e.what());
  }
  return out;
}

}  // namespace

LoadedSubnet topology_from_json(const std::string& text) {
  try {
    return subnet_from(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("topology json: ") + e.what());
  }
}

LoadedSubnet load_subnet(const std::filesystem::path& path) {
  return subnet_from(detail::read_json_file(path));
}

}  // namespace sns
