#include "xcosw/compiler.hpp"

#include "xcosw/format.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace xcosw {

using nlohmann::json;

std::string_view to_string(Severity s) noexcept { return s == Severity::Error ? "error" : "warning"; }

bool has_errors(const std::vector<Diagnostic> &diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic &d) { return d.severity == Severity::Error; });
}

std::string format_diagnostic(const Diagnostic &d) {
  std::string out(to_string(d.severity));
  out += ' ';
  out += d.code;
  out += ' ';
  for (std::size_t i = 0; i < d.blocks.size(); ++i) {
    if (i) out += ',';
    out += d.blocks[i];
  }
  out += ": ";
  out += d.message;
  return out;
}

json diagnostics_to_json(const std::vector<Diagnostic> &diagnostics) {
  json out = json::array();
  for (const auto &d : diagnostics)
    out.push_back({{"severity", to_string(d.severity)},
                   {"code", d.code},
                   {"blocks", d.blocks},
                   {"message", d.message}});
  return out;
}

NotValidatedError::NotValidatedError(std::vector<Diagnostic> diagnostics)
    : Error(Errc::NotValidated,
            "diagram has " + std::to_string(diagnostics.size()) + " diagnostic(s)" +
                (diagnostics.empty() ? std::string() : "; first: " + format_diagnostic(diagnostics.front()))),
      diagnostics_(std::move(diagnostics)) {}

// --- graph ----------------------------------------------------------------

void DirectedGraph::add_node(const std::string &id) { nodes_.insert(id); }

void DirectedGraph::add_edge(const std::string &from, const std::string &to) {
  nodes_.insert(from);
  nodes_.insert(to);
  out_[from].insert(to);
}

const std::set<std::string, IdLess> &DirectedGraph::successors(const std::string &id) const {
  static const std::set<std::string, IdLess> none;
  auto it = out_.find(id);
  return it == out_.end() ? none : it->second;
}

bool DirectedGraph::has_edge(const std::string &from, const std::string &to) const {
  return successors(from).count(to) > 0;
}

std::size_t DirectedGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto &[from, tos] : out_) n += tos.size();
  return n;
}

std::vector<std::vector<std::string>> DirectedGraph::cyclic_components() const {
  // Iterative Tarjan.
  std::map<std::string, std::size_t, IdLess> index, low;
  std::set<std::string, IdLess> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  std::size_t counter = 0;

  struct Frame {
    std::string node;
    std::vector<std::string> succ;
    std::size_t next = 0;
  };

  for (const auto &start : nodes_) {
    if (index.count(start)) continue;
    std::vector<Frame> frames;
    auto push = [&](const std::string &n) {
      index[n] = low[n] = counter++;
      stack.push_back(n);
      on_stack.insert(n);
      const auto &s = successors(n);
      frames.push_back({n, std::vector<std::string>(s.begin(), s.end()), 0});
    };
    push(start);
    while (!frames.empty()) {
      Frame &f = frames.back();
      if (f.next < f.succ.size()) {
        const std::string w = f.succ[f.next++];
        if (!index.count(w)) {
          push(w);
        } else if (on_stack.count(w)) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      const std::string v = f.node;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::string> comp;
        std::string w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack.erase(w);
          comp.push_back(w);
        } while (w != v);
        if (comp.size() > 1 || has_edge(v, v)) {
          std::sort(comp.begin(), comp.end(), IdLess{});
          out.push_back(std::move(comp));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto &a, const auto &b) { return id_less(a.front(), b.front()); });
  return out;
}

namespace {

std::vector<bool> feedthrough_of(const Block &b) {
  std::vector<bool> ft(b.n_in, false);
  try {
    const ResolvedBlock rb = resolve_block(b.id, b.kind, b.params);
    for (std::size_t i = 0; i < b.n_in; ++i) ft[i] = rb.feedthrough(i);
  } catch (const Error &) {
    // unresolved parameters are reported separately; no dependency assumed
  }
  return ft;
}

DirectedGraph build_graph(const Diagram &d, bool skip_opaque) {
  DirectedGraph g;
  std::map<std::string, std::vector<bool>, IdLess> ft;
  for (const auto &b : d.blocks) {
    if (b.opaque()) {
      if (skip_opaque) continue;
      throw Error(Errc::UnknownKind, "block " + b.id + " has unknown kind '" + b.kind + "'");
    }
    g.add_node(b.id);
    ft.emplace(b.id, feedthrough_of(b));
  }
  for (const auto &l : d.links) {
    auto src = ft.find(l.src.block);
    auto dst = ft.find(l.dst.block);
    if (src == ft.end() || dst == ft.end()) continue;
    if (l.dst.port < dst->second.size() && dst->second[l.dst.port]) g.add_edge(l.src.block, l.dst.block);
  }
  return g;
}

std::string quoted_list(const std::vector<std::string> &names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += "'" + names[i] + "'";
  }
  return out;
}

} // namespace

DirectedGraph feedthrough_graph(const Diagram &d) { return build_graph(d, false); }

std::vector<std::string> schedule(const DirectedGraph &g) {
  std::map<std::string, std::size_t, IdLess> indegree;
  for (const auto &n : g.nodes()) indegree[n] = 0;
  for (const auto &n : g.nodes())
    for (const auto &m : g.successors(n)) ++indegree[m];

  std::priority_queue<std::string, std::vector<std::string>, std::function<bool(const std::string &, const std::string &)>>
      ready([](const std::string &a, const std::string &b) { return id_less(b, a); });
  for (const auto &[n, deg] : indegree)
    if (deg == 0) ready.push(n);

  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string n = ready.top();
    ready.pop();
    for (const auto &m : g.successors(n))
      if (--indegree[m] == 0) ready.push(m);
    order.push_back(std::move(n));
  }
  if (order.size() != g.nodes().size()) {
    auto comps = g.cyclic_components();
    throw LoopError(comps.empty() ? std::vector<std::string>{} : comps.front());
  }
  return order;
}

std::vector<Diagnostic> validate(const Diagram &d) {
  std::vector<Diagnostic> out;
  std::vector<const Block *> blocks;
  for (const auto &b : d.blocks) blocks.push_back(&b);
  std::sort(blocks.begin(), blocks.end(), [](const Block *a, const Block *b) { return id_less(a->id, b->id); });

  for (const Block *b : blocks) {
    const BlockSpec *spec = find_spec(b->kind);
    if (!spec) {
      out.push_back({Severity::Error, std::string(diag::kUnknownKind), {b->id},
                     "block kind '" + b->kind + "' is not in the palette"});
    } else {
      std::vector<std::string> unset;
      for (const auto &issue : check_params(*spec, b->params)) {
        if (issue.unset)
          unset.push_back(issue.param);
        else
          out.push_back({Severity::Error, std::string(diag::kBadParam), {b->id}, issue.message});
      }
      if (!unset.empty())
        out.push_back({Severity::Error, std::string(diag::kUnsetParam), {b->id},
                       spec->name + (unset.size() == 1 ? " parameter " : " parameters ") +
                           quoted_list(unset) + (unset.size() == 1 ? " is" : " are") + " unset"});
    }
    for (std::size_t port = 0; port < b->n_in; ++port)
      if (!d.driver_of(PortRef{b->id, port}))
        out.push_back({Severity::Error, std::string(diag::kDanglingInput), {b->id},
                       "input port " + std::to_string(port) + " is not connected"});
  }

  for (auto &comp : build_graph(d, true).cyclic_components()) {
    std::string msg = "algebraic loop through " + quoted_list(comp);
    out.push_back({Severity::Error, std::string(diag::kAlgebraicLoop), std::move(comp), std::move(msg)});
  }
  return out;
}

// --- compiled system -------------------------------------------------------

CompiledSystem compile(const Diagram &d) {
  auto diagnostics = validate(d);
  if (has_errors(diagnostics)) throw NotValidatedError(std::move(diagnostics));

  CompiledSystem sys;
  sys.eval_order_ = schedule(feedthrough_graph(d));

  std::map<std::string, std::size_t, IdLess> position;
  std::size_t out_offset = 0;
  for (const auto &id : sys.eval_order_) {
    const Block &b = *d.find_block(id);
    CompiledSystem::Node node{resolve_block(b.id, b.kind, b.params), {}, out_offset, {}, {}};
    out_offset += b.n_out;
    node.cstate = {sys.state_dim_, node.block.n_cstates()};
    sys.state_dim_ += node.cstate.size;
    node.dstate = {sys.discrete_dim_, node.block.n_dstates()};
    sys.discrete_dim_ += node.dstate.size;
    if (node.cstate.size > 0) sys.layout_.emplace(id, node.cstate);
    if (node.dstate.size > 0) sys.discrete_layout_.emplace(id, node.dstate);
    position.emplace(id, sys.nodes_.size());
    sys.nodes_.push_back(std::move(node));
  }

  // Input slots follow all block outputs so a block reads its inputs as one span.
  sys.inputs_base_ = out_offset;
  std::size_t in_offset = out_offset;
  for (auto &node : sys.nodes_) {
    const std::size_t n_in = node.block.n_in();
    node.inputs.resize(n_in);
    for (std::size_t port = 0; port < n_in; ++port) {
      const Link *l = d.driver_of(PortRef{node.block.id, port});
      const auto &src = sys.nodes_[position.at(l->src.block)];
      node.inputs[port] = src.out_offset + l->src.port;
    }
    in_offset += n_in;
  }
  sys.signal_count_ = in_offset;

  std::vector<std::string> sorted(sys.eval_order_);
  std::sort(sorted.begin(), sorted.end(), IdLess{});
  for (const auto &id : sorted) {
    const auto &node = sys.nodes_[position.at(id)];
    if (node.block.kind() == BlockKind::Scope) sys.probes_.push_back({id, node.inputs[0]});
    if (auto period = node.block.sample_period()) sys.sample_grids_.push_back({id, *period});
    if (auto *step = std::get_if<params::Step>(&node.block.params)) sys.breakpoints_.push_back(step->step_time);
  }
  std::sort(sys.breakpoints_.begin(), sys.breakpoints_.end());
  sys.breakpoints_.erase(std::unique(sys.breakpoints_.begin(), sys.breakpoints_.end()), sys.breakpoints_.end());
  return sys;
}

const ResolvedBlock &CompiledSystem::block(const std::string &id) const {
  for (const auto &node : nodes_)
    if (node.block.id == id) return node.block;
  throw Error(Errc::BadEndpoint, "no compiled block '" + id + "'");
}

std::vector<double> CompiledSystem::initial_state() const {
  std::vector<double> x(state_dim_, 0.0);
  for (const auto &node : nodes_)
    if (node.cstate.size > 0) {
      auto init = node.block.initial_state();
      std::copy(init.begin(), init.end(), x.begin() + static_cast<std::ptrdiff_t>(node.cstate.offset));
    }
  return x;
}

std::vector<double> CompiledSystem::initial_discrete_state() const {
  std::vector<double> xd(discrete_dim_, 0.0);
  for (const auto &node : nodes_)
    if (node.dstate.size > 0) {
      auto init = node.block.initial_state();
      std::copy(init.begin(), init.end(), xd.begin() + static_cast<std::ptrdiff_t>(node.dstate.offset));
    }
  return xd;
}

namespace {

[[noreturn]] void non_finite(const std::string &block, double t, const char *what) {
  throw Error(Errc::NonFinite, std::string(what) + " of block " + block + " is not finite at t=" + format_real(t));
}

} // namespace

void CompiledSystem::outputs(double t, std::span<const double> x, std::span<const double> xd,
                             std::span<double> signals, Approach approach, bool sampling) const {
  std::size_t in_offset = inputs_base_;
  for (const auto &node : nodes_) {
    const std::size_t n_in = node.inputs.size();
    for (std::size_t i = 0; i < n_in; ++i) signals[in_offset + i] = signals[node.inputs[i]];
    const auto state = node.dstate.size > 0 ? xd.subspan(node.dstate.offset, node.dstate.size)
                                             : x.subspan(node.cstate.offset, node.cstate.size);
    const std::size_t n_out = node.block.n_out();
    auto out = signals.subspan(node.out_offset, n_out);
    const auto period = node.block.sample_period();
    const bool hit = sampling && period && is_sample_hit(*period, t);
    block_output(node.block, state, signals.subspan(in_offset, n_in), t, out, approach, hit);
    for (double v : out)
      if (!std::isfinite(v)) non_finite(node.block.id, t, "output");
    in_offset += n_in;
  }
}

void CompiledSystem::derivative(double t, std::span<const double> x, std::span<const double> xd,
                                std::span<double> signals, std::span<double> dx,
                                Approach approach) const {
  outputs(t, x, xd, signals, approach);
  std::size_t in_offset = inputs_base_;
  for (const auto &node : nodes_) {
    const std::size_t n_in = node.inputs.size();
    if (node.cstate.size > 0) {
      for (std::size_t i = 0; i < n_in; ++i) signals[in_offset + i] = signals[node.inputs[i]];
      auto out = dx.subspan(node.cstate.offset, node.cstate.size);
      block_derivative(node.block, x.subspan(node.cstate.offset, node.cstate.size),
                       signals.subspan(in_offset, n_in), t, out);
      for (double v : out)
        if (!std::isfinite(v)) non_finite(node.block.id, t, "derivative");
    }
    in_offset += n_in;
  }
}

std::size_t CompiledSystem::discrete_update(double t, std::span<double> xd,
                                            std::span<const double> signals) const {
  std::size_t updated = 0;
  std::vector<double> in;
  for (const auto &node : nodes_) {
    const auto period = node.block.sample_period();
    if (!period || !is_sample_hit(*period, t)) continue;
    in.clear();
    for (std::size_t src : node.inputs) in.push_back(signals[src]);
    auto next = block_discrete_update(node.block, xd.subspan(node.dstate.offset, node.dstate.size), in, t);
    std::copy(next.begin(), next.end(), xd.begin() + static_cast<std::ptrdiff_t>(node.dstate.offset));
    ++updated;
  }
  return updated;
}

void CompiledSystem::read_probes(std::span<const double> signals, std::span<double> out) const {
  for (std::size_t i = 0; i < probes_.size(); ++i) out[i] = signals[probes_[i].signal];
}

} // namespace xcosw
