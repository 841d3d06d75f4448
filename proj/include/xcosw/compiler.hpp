#pragma once

#include "xcosw/blocks.hpp"
#include "xcosw/diagram.hpp"
#include "xcosw/error.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace xcosw {

enum class Severity { Error, Warning };

std::string_view to_string(Severity s) noexcept;

namespace diag {
inline constexpr std::string_view kUnsetParam = "UNSET_PARAM";
inline constexpr std::string_view kBadParam = "BAD_PARAM";
inline constexpr std::string_view kDanglingInput = "DANGLING_INPUT";
inline constexpr std::string_view kUnknownKind = "UNKNOWN_KIND";
inline constexpr std::string_view kAlgebraicLoop = "ALGEBRAIC_LOOP";
} // namespace diag

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::vector<std::string> blocks;
  std::string message;

  bool operator==(const Diagnostic &) const = default;
};

bool has_errors(const std::vector<Diagnostic> &diagnostics);

/// `severity code blocks: message`, blocks comma-separated.
std::string format_diagnostic(const Diagnostic &d);
nlohmann::json diagnostics_to_json(const std::vector<Diagnostic> &diagnostics);

/// Everything that prevents compilation: UNKNOWN_KIND per opaque block,
/// UNSET_PARAM per block with unset parameters, BAD_PARAM per parameter that
/// does not evaluate, DANGLING_INPUT per unconnected input and ALGEBRAIC_LOOP
/// per strongly connected component of the feedthrough graph. Empty means
/// compilable.
std::vector<Diagnostic> validate(const Diagram &d);

/// Directed graph over block ids with deterministic (id_less) iteration.
class DirectedGraph {
public:
  void add_node(const std::string &id);
  void add_edge(const std::string &from, const std::string &to);

  [[nodiscard]] const std::set<std::string, IdLess> &nodes() const { return nodes_; }
  [[nodiscard]] const std::set<std::string, IdLess> &successors(const std::string &id) const;
  [[nodiscard]] bool has_edge(const std::string &from, const std::string &to) const;
  [[nodiscard]] std::size_t edge_count() const;

  /// Strongly connected components that contain a cycle (size > 1 or a
  /// self-edge), each sorted by id_less, ordered by their smallest id.
  [[nodiscard]] std::vector<std::vector<std::string>> cyclic_components() const;

private:
  std::set<std::string, IdLess> nodes_;
  std::map<std::string, std::set<std::string, IdLess>, IdLess> out_;
};

/// Edge u->v iff a link runs from an output of u into an input of v that is
/// direct-feedthrough for v. Throws Error(UnknownKind) for opaque blocks. A
/// block whose parameters cannot be resolved is treated as not feedthrough.
DirectedGraph feedthrough_graph(const Diagram &d);

/// Topological order breaking ties by ascending id. Throws LoopError with the
/// members of a cyclic component.
std::vector<std::string> schedule(const DirectedGraph &g);

struct StateSlice {
  std::size_t offset = 0;
  std::size_t size = 0;

  bool operator==(const StateSlice &) const = default;
};

struct SampleGrid {
  std::string block;
  double period = 0.0;

  bool operator==(const SampleGrid &) const = default;
};

/// A recorded signal: the input of a CSCOPE block, named by its id.
struct Probe {
  std::string id;
  std::size_t signal = 0;

  bool operator==(const Probe &) const = default;
};

/// Flattened executable form of a diagram. Immutable once built and safe to
/// share between concurrent runs; all scratch storage is supplied by callers.
class CompiledSystem {
public:
  [[nodiscard]] std::size_t state_dim() const { return state_dim_; }
  [[nodiscard]] std::size_t discrete_dim() const { return discrete_dim_; }
  [[nodiscard]] std::size_t signal_count() const { return signal_count_; }

  [[nodiscard]] const std::map<std::string, StateSlice, IdLess> &layout() const { return layout_; }
  [[nodiscard]] const std::vector<std::string> &eval_order() const { return eval_order_; }
  [[nodiscard]] const std::vector<SampleGrid> &sample_grids() const { return sample_grids_; }
  [[nodiscard]] const std::vector<Probe> &probes() const { return probes_; }
  /// Switching instants of piecewise-constant sources (step times).
  [[nodiscard]] const std::vector<double> &breakpoints() const { return breakpoints_; }
  [[nodiscard]] const ResolvedBlock &block(const std::string &id) const;

  [[nodiscard]] std::vector<double> initial_state() const;
  [[nodiscard]] std::vector<double> initial_discrete_state() const;

  /// Evaluates every block output in eval_order into `signals`; `sampling`
  /// marks t as an event instant where discrete blocks with a hit refresh. Throws
  /// Error(NonFinite) naming the block and time when an output is not finite.
  void outputs(double t, std::span<const double> x, std::span<const double> xd,
               std::span<double> signals, Approach approach = Approach::FromRight,
               bool sampling = false) const;

  /// outputs() followed by each block's derivative into `dx`. Throws
  /// Error(NonFinite) naming the block and time when a value is not finite.
  void derivative(double t, std::span<const double> x, std::span<const double> xd,
                  std::span<double> signals, std::span<double> dx,
                  Approach approach = Approach::FromRight) const;

  /// Applies the discrete update of every block with a sample hit at `t`,
  /// reading inputs from `signals` as computed by outputs() with sampling set. Returns the number of
  /// blocks updated.
  std::size_t discrete_update(double t, std::span<double> xd, std::span<const double> signals) const;

  void read_probes(std::span<const double> signals, std::span<double> out) const;

private:
  friend CompiledSystem compile(const Diagram &d);

  struct Node {
    ResolvedBlock block;
    std::vector<std::size_t> inputs; // signal index per input port
    std::size_t out_offset = 0;
    StateSlice cstate;
    StateSlice dstate;
  };

  std::vector<Node> nodes_; // in evaluation order
  std::size_t state_dim_ = 0;
  std::size_t discrete_dim_ = 0;
  std::size_t signal_count_ = 0;
  std::size_t inputs_base_ = 0;
  std::map<std::string, StateSlice, IdLess> layout_;
  std::map<std::string, StateSlice, IdLess> discrete_layout_;
  std::vector<std::string> eval_order_;
  std::vector<SampleGrid> sample_grids_;
  std::vector<Probe> probes_;
  std::vector<double> breakpoints_;
};

/// Raised by compile() when validation reports errors.
class NotValidatedError : public Error {
public:
  explicit NotValidatedError(std::vector<Diagnostic> diagnostics);

  [[nodiscard]] const std::vector<Diagnostic> &diagnostics() const noexcept { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

/// Validates, then flattens. Throws NotValidatedError when validate() reports
/// any error.
CompiledSystem compile(const Diagram &d);

} // namespace xcosw
