#include "vortexshape/shapegrad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "vortexshape/quadrature.hpp"

namespace vortexshape {

namespace {

int sorted_index(const std::vector<int>& nodes, int node) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
  if (it == nodes.end() || *it != node)
    throw std::out_of_range("node is not a FREE boundary node");
  return static_cast<int>(it - nodes.begin());
}

// FREE boundary edge with its adjacent triangle
struct FreeEdge {
  int bnd_index;  // index into mesh.boundary_edges
  int a, b, mid;  // velocity nodes
  int tri;
};

std::vector<FreeEdge> collect_free_edges(const DofMap& dm) {
  const Mesh& mesh = dm.mesh();
  std::map<std::pair<int, int>, int> bnd_of_edge;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const BoundaryEdge& e = mesh.boundary_edges[k];
    if (e.tag == Tag::FREE)
      bnd_of_edge[{std::min(e.a, e.b), std::max(e.a, e.b)}] = static_cast<int>(k);
  }
  std::vector<FreeEdge> out;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tr[k], b = tr[(k + 1) % 3];
      auto it = bnd_of_edge.find({std::min(a, b), std::max(a, b)});
      if (it == bnd_of_edge.end()) continue;
      const BoundaryEdge& e = mesh.boundary_edges[it->second];
      out.push_back({it->second, e.a, e.b, dm.boundary_edge_midnode(it->second), t});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const FreeEdge& x, const FreeEdge& y) { return x.bnd_index < y.bnd_index; });
  return out;
}

const Vec2 kSlotCoords[6] = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};

}  // namespace

int BoundaryScalar::index_of(int node) const { return sorted_index(nodes, node); }
int BoundaryFrame::index_of(int node) const { return sorted_index(nodes, node); }

BoundaryFrame boundary_frame(const DofMap& dm) {
  const Mesh& mesh = dm.mesh();
  mesh.free_loop();  // rejects open or multi-loop FREE boundaries

  BoundaryFrame frame;
  frame.nodes = dm.boundary_nodes(Tag::FREE);
  frame.normal.assign(frame.nodes.size(), Vec2{0, 0});
  frame.tangent.assign(frame.nodes.size(), Vec2{0, 0});

  for (const FreeEdge& fe : collect_free_edges(dm)) {
    const Vec2& a = mesh.vertices[fe.a];
    const Vec2& b = mesh.vertices[fe.b];
    double len = dist(a, b);
    Vec2 n = normalized(rotate_cw(b - a));
    // orient away from the triangle's third vertex (outward of the fluid)
    const auto& tr = mesh.triangles[fe.tri];
    Vec2 inside{0, 0};
    for (int v : tr) inside += mesh.vertices[v];
    inside = inside / 3.0;
    if (dot(n, inside - (a + b) * 0.5) > 0.0) n = -1.0 * n;
    frame.normal[frame.index_of(fe.a)] += 0.5 * len * n;
    frame.normal[frame.index_of(fe.b)] += 0.5 * len * n;
    frame.normal[frame.index_of(fe.mid)] += n;
  }
  for (std::size_t i = 0; i < frame.nodes.size(); ++i) {
    frame.normal[i] = normalized(frame.normal[i]);
    frame.tangent[i] = rotate_cw(frame.normal[i]);
  }
  return frame;
}

Field extend_normal(std::shared_ptr<const DofMap> dofmap, double epsilon,
                    const SpMat* stiffness, const BoundaryFrame* data) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("extend_normal: epsilon must be > 0");
  const DofMap& dm = *dofmap;
  const Mesh& mesh = dm.mesh();
  const int nv = dm.num_velocity_dofs();

  SpMat K;
  if (stiffness) {
    K = *stiffness;
  } else {
    K = assemble(dofmap, 1.0).A;
  }

  BoundaryFrame frame = data ? *data : boundary_frame(dm);
  std::vector<Eigen::Triplet<double>> tmass;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);
  for (const FreeEdge& fe : collect_free_edges(dm)) {
    const Vec2& a = mesh.vertices[fe.a];
    const Vec2& b = mesh.vertices[fe.b];
    double len = dist(a, b);
    int nodes[3] = {fe.a, fe.b, fe.mid};
    Vec2 ndata[3] = {frame.normal[frame.index_of(fe.a)], frame.normal[frame.index_of(fe.b)],
                     frame.normal[frame.index_of(fe.mid)]};
    for (const QPoint1& q : edge_rule()) {
      auto phi = p2_edge_values(q.t);
      Vec2 nq = phi[0] * ndata[0] + phi[1] * ndata[1] + phi[2] * ndata[2];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          double mij = q.w * len * phi[i] * phi[j];
          tmass.emplace_back(2 * nodes[i], 2 * nodes[j], mij);
          tmass.emplace_back(2 * nodes[i] + 1, 2 * nodes[j] + 1, mij);
        }
        rhs[2 * nodes[i]] += q.w * len * phi[i] * nq.x;
        rhs[2 * nodes[i] + 1] += q.w * len * phi[i] * nq.y;
      }
    }
  }
  SpMat Mb(nv, nv);
  Mb.setFromTriplets(tmass.begin(), tmass.end());
  SpMat sys = epsilon * K + Mb;

  Eigen::SimplicialLDLT<SpMat> ldlt(sys);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("normal extension factorization failed");
  Field N(dofmap, Field::Kind::VectorQuadratic);
  N.coeffs = ldlt.solve(rhs);
  return N;
}

// One-sided gradients are evaluated at the FREE edge midpoints, where the
// quadratic gradient is clean; vertex values average their incident edges
// with length weights. Corner-point evaluation oscillates between vertex and
// midside nodes and feeds noise straight into the boundary load.
std::vector<Grad2> boundary_gradient(const Field& field) {
  const DofMap& dm = *field.dofmap;
  const Mesh& mesh = dm.mesh();
  const std::vector<int>& free_nodes = dm.boundary_nodes(Tag::FREE);
  std::vector<Grad2> out(free_nodes.size());
  std::vector<double> wsum(free_nodes.size(), 0.0);
  auto idx = [&](int node) { return sorted_index(free_nodes, node); };

  for (const FreeEdge& fe : collect_free_edges(dm)) {
    const auto& nodes = dm.triangle_nodes(fe.tri);
    int slot = -1;
    for (int s = 3; s < 6; ++s)
      if (nodes[s] == fe.mid) slot = s;
    if (slot < 0) throw std::runtime_error("FREE edge midnode missing from its triangle");
    ElementGeometry geo(mesh, fe.tri);
    Grad2 g = field_gradient(field, geo, nodes, kSlotCoords[slot].x, kSlotCoords[slot].y);

    double w = 0.5 * dist(mesh.vertices[fe.a], mesh.vertices[fe.b]);
    for (int node : {fe.a, fe.b}) {
      int i = idx(node);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out[i].g[r][c] += w * g.g[r][c];
      wsum[i] += w;
    }
    out[idx(fe.mid)] = g;
    wsum[idx(fe.mid)] = -1.0;  // exact midpoint value, no averaging
  }
  for (std::size_t i = 0; i < free_nodes.size(); ++i) {
    if (wsum[i] > 0.0)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out[i].g[r][c] /= wsum[i];
  }
  return out;
}

BoundaryScalar curvature(const Field& N, const BoundaryFrame* frame_in) {
  const DofMap& dm = *N.dofmap;
  BoundaryFrame frame = frame_in ? *frame_in : boundary_frame(dm);
  BoundaryScalar kappa;
  kappa.nodes = dm.boundary_nodes(Tag::FREE);
  std::vector<Grad2> grads = boundary_gradient(N);
  kappa.values.resize(kappa.nodes.size());
  for (std::size_t i = 0; i < kappa.nodes.size(); ++i) {
    const Vec2& n = frame.normal[i];
    double ngn = n.x * (grads[i].g[0][0] * n.x + grads[i].g[0][1] * n.y) +
                 n.y * (grads[i].g[1][0] * n.x + grads[i].g[1][1] * n.y);
    kappa.values[i] = grads[i].div() - ngn;
  }
  return kappa;
}

std::vector<Vec2> normal_derivative(const Field& field, const BoundaryFrame& frame) {
  std::vector<Grad2> grads = boundary_gradient(field);
  std::vector<Vec2> out(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const Vec2& n = frame.normal[i];
    out[i] = {grads[i].g[0][0] * n.x + grads[i].g[0][1] * n.y,
              grads[i].g[1][0] * n.x + grads[i].g[1][1] * n.y};
  }
  return out;
}

BoundaryScalar shape_gradient(const Mesh& mesh, const StateSolution& state,
                              const AdjointSolution& adjoint, const BoundaryScalar& kappa,
                              const BoundaryFrame& frame, const FunctionalParams& params,
                              double nu) {
  (void)mesh;
  std::vector<Grad2> gu = boundary_gradient(state.u);
  std::vector<Grad2> gv = boundary_gradient(adjoint.v);

  BoundaryScalar out;
  out.nodes = frame.nodes;
  out.values.resize(out.nodes.size());
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    const Vec2& n = frame.normal[i];
    // the 2D Green curl identity fixes the tangent as n rotated by +pi/2;
    // on a no-slip boundary curl u = du/dn . tau_green, which the
    // finite-difference oracle confirms (the frame's stored tangent has the
    // opposite orientation)
    Vec2 tau_green = -1.0 * frame.tangent[i];
    double curl = gu[i].curl();
    double det = gu[i].det();
    Vec2 dnu{gu[i].g[0][0] * n.x + gu[i].g[0][1] * n.y,
             gu[i].g[1][0] * n.x + gu[i].g[1][1] * n.y};
    Vec2 dnv{gv[i].g[0][0] * n.x + gv[i].g[0][1] * n.y,
             gv[i].g[1][0] * n.x + gv[i].g[1][1] * n.y};
    double hp = h_prime(det);
    Vec2 pu{hp * (gu[i].g[1][1] * n.x - gu[i].g[1][0] * n.y),
            hp * (gu[i].g[0][0] * n.y - gu[i].g[0][1] * n.x)};
    Vec2 inner = nu * dnv + params.gamma1 * curl * tau_green + params.gamma2 * pu;
    out.values[i] = params.alpha * kappa.values[i] - 0.5 * params.gamma1 * curl * curl -
                    params.gamma2 * h_eval(det) + dot(dnu, inner);
  }
  return out;
}

BoundaryScalar lagrangian_gradient(const BoundaryScalar& gradG, double ell, double b,
                                   double volume, double m) {
  if (!(volume > 0.0)) throw std::invalid_argument("lagrangian_gradient: volume must be > 0");
  BoundaryScalar out = gradG;
  double shift = -ell + b * (volume - m);
  for (double& v : out.values) v += shift;
  return out;
}

double boundary_pairing(const BoundaryScalar& values, const Field& theta,
                        const BoundaryFrame& frame) {
  const DofMap& dm = *theta.dofmap;
  const Mesh& mesh = dm.mesh();
  double acc = 0.0;
  for (const FreeEdge& fe : collect_free_edges(dm)) {
    const Vec2& a = mesh.vertices[fe.a];
    const Vec2& b = mesh.vertices[fe.b];
    double len = dist(a, b);
    int nodes[3] = {fe.a, fe.b, fe.mid};
    for (const QPoint1& q : edge_rule()) {
      auto phi = p2_edge_values(q.t);
      double val = 0.0;
      Vec2 th{0, 0}, nq{0, 0};
      for (int i = 0; i < 3; ++i) {
        int idx = values.index_of(nodes[i]);
        val += phi[i] * values.values[idx];
        th += phi[i] * theta.node_value(nodes[i]);
        nq += phi[i] * frame.normal[frame.index_of(nodes[i])];
      }
      acc += q.w * len * val * dot(th, nq);
    }
  }
  return acc;
}

double free_boundary_l2sq(const Field& theta) {
  const DofMap& dm = *theta.dofmap;
  const Mesh& mesh = dm.mesh();
  double acc = 0.0;
  for (const FreeEdge& fe : collect_free_edges(dm)) {
    double len = dist(mesh.vertices[fe.a], mesh.vertices[fe.b]);
    int nodes[3] = {fe.a, fe.b, fe.mid};
    for (const QPoint1& q : edge_rule()) {
      auto phi = p2_edge_values(q.t);
      Vec2 th{0, 0};
      for (int i = 0; i < 3; ++i) th += phi[i] * theta.node_value(nodes[i]);
      acc += q.w * len * norm2(th);
    }
  }
  return acc;
}

double ShapeDerivativeReport::worst_relative_error() const {
  double worst = 0.0;
  for (const auto& r : rows)
    if (!r.skipped) worst = std::max(worst, r.error / std::max(std::abs(formula), 1e-300));
  return worst;
}

ShapeDerivativeReport validate_shape_derivative(const Mesh& mesh,
                                                const FunctionalParams& params, double nu,
                                                const BoundaryFunction& inflow,
                                                const Field& theta,
                                                const std::vector<double>& steps,
                                                double epsilon_normal) {
  auto mesh_ptr = std::make_shared<Mesh>(mesh);
  StokesSolver solver(mesh_ptr, nu);
  StateSolution state = solver.solve_state(inflow);
  AdjointSolution adjoint = solver.solve_adjoint(state, params.gamma1, params.gamma2);

  Field N = extend_normal(solver.dofmap_ptr(), epsilon_normal);
  BoundaryScalar kappa = curvature(N);
  BoundaryFrame frame = boundary_frame(solver.dofmap());
  BoundaryScalar gradG =
      shape_gradient(*mesh_ptr, state, adjoint, kappa, frame, params, nu);

  ShapeDerivativeReport report;
  report.formula = boundary_pairing(gradG, theta, frame);

  auto objective_on = [&](const Mesh& m) {
    auto mp = std::make_shared<Mesh>(m);
    StokesSolver s(mp, nu);
    StateSolution st = s.solve_state(inflow);
    ObjectiveBreakdown bd = eval_breakdown(*mp, st, params);
    return bd.objective;
  };

  for (double t : steps) {
    ShapeDerivativeRow row;
    row.t = t;
    Mesh plus = apply_deformation(mesh, theta, t);
    Mesh minus = apply_deformation(mesh, theta, -t);
    if (mesh_quality(plus).degenerate || mesh_quality(minus).degenerate) {
      row.skipped = true;
      report.rows.push_back(row);
      continue;
    }
    row.fd = (objective_on(plus) - objective_on(minus)) / (2.0 * t);
    row.error = std::abs(row.fd - report.formula);
    report.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 2 < report.rows.size(); ++i) {
    const auto& r0 = report.rows[i];
    const auto& r1 = report.rows[i + 1];
    const auto& r2 = report.rows[i + 2];
    if (r0.skipped || r1.skipped || r2.skipped) continue;
    double ratio = r0.t / r1.t;
    if (std::abs(ratio - r1.t / r2.t) > 1e-9 * ratio) continue;  // needs uniform spacing
    double d01 = std::abs(r0.fd - r1.fd);
    double d12 = std::abs(r1.fd - r2.fd);
    if (d12 > 0.0 && ratio > 1.0)
      report.fd_orders.push_back(std::log(d01 / d12) / std::log(ratio));
  }
  return report;
}

}  // namespace vortexshape
