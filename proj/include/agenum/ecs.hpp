#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace agenum {

struct OutputLetter {
  uint32_t position = 0;  // 1-based
  uint32_t annotation = 0;

  auto operator<=>(const OutputLetter&) const = default;
};

using Output = std::vector<OutputLetter>;

using NodeId = uint32_t;
inline constexpr NodeId kBottom = 0;

enum class NodeKind : uint8_t { kBottom, kSingleton, kProduct, kUnion2, kUnion3 };

struct Node {
  NodeKind kind = NodeKind::kBottom;
  // Singleton: a = position, b = annotation. Product: a, b. Union2: a, b.
  // Union3: a, b, c.
  uint32_t a = 0, b = 0, c = 0;

  bool is_exit() const {
    return kind == NodeKind::kSingleton || kind == NodeKind::kProduct;
  }
};

struct SetHandle {
  NodeId node = kBottom;
  bool has_eps = false;

  bool empty() const { return node == kBottom && !has_eps; }
  bool operator==(const SetHandle&) const = default;
};

// Append-only arena of enumerable-set nodes. Node 0 is the shared ∅ node, so
// a fresh store reports node_count() == 1.
class NodeStore {
 public:
  NodeStore();

  SetHandle make_empty() const { return {kBottom, false}; }
  SetHandle make_eps() const { return {kBottom, true}; }
  SetHandle make_singleton(OutputLetter letter);
  // Operands must denote disjoint sets.
  SetHandle make_union(SetHandle a, SetHandle b);
  // Operands must use disjoint letters.
  SetHandle make_product(SetHandle a, SetHandle b);

  size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  void reserve(size_t n) { nodes_.reserve(n); }

  // One line per node: `id KIND children...`.
  std::string dump() const;

 private:
  NodeId union_nodes(NodeId a, NodeId b);
  NodeId product_nodes(NodeId a, NodeId b);
  NodeId add(Node n);

  std::vector<Node> nodes_;
};

// Yields the exits of a node: the singleton and product nodes reachable
// through union nodes only.
class ExitIterator {
 public:
  ExitIterator() = default;

  void reset(const NodeStore* store, NodeId root);
  bool has_next() const { return !stack_.empty(); }
  NodeId next();

  uint64_t pops() const { return pops_; }
  size_t stack_size() const { return stack_.size(); }

 private:
  const NodeStore* store_ = nullptr;
  std::vector<NodeId> stack_;
  uint64_t pops_ = 0;
};

// Enumerates the strings of a handle: ε first when present, then the node's
// strings with the left factor of every product varying fastest.
class SetEnumerator {
 public:
  SetEnumerator(const NodeStore& store, SetHandle handle);

  bool next(Output* out);

  // Primitive steps taken since construction; differences between calls
  // give the delay of each output.
  uint64_t steps() const { return steps_; }
  // Tree nodes in use (live plus recyclable) and iterator stack entries.
  size_t working_memory() const;
  size_t max_pops_per_exit() const { return max_pops_per_exit_; }

 private:
  struct TreeNode {
    NodeId dag = kBottom;
    bool concat = false;
    bool has_next = false;
    uint32_t left = 0, right = 0;
    ExitIterator exits1, exits2;
  };

  const Node& dag(NodeId id) const;
  uint32_t alloc(NodeId dag);
  void release(uint32_t t);
  NodeId take_exit(ExitIterator* it);
  void reset_iterator(ExitIterator* it, NodeId root);
  void unfold(uint32_t t);
  void advance(uint32_t t);
  void refresh(uint32_t t);
  void collect(uint32_t t, Output* out);

  static constexpr NodeId kRoot = UINT32_MAX - 1;
  static constexpr NodeId kSentinel = UINT32_MAX - 2;

  const NodeStore& store_;
  SetHandle handle_;
  Node root_node_;
  Node sentinel_node_;
  std::vector<TreeNode> pool_;
  std::vector<uint32_t> garbage_;
  uint32_t root_ = 0;
  bool eps_pending_ = false;
  bool started_ = false;
  bool done_ = false;
  uint64_t steps_ = 0;
  size_t max_pops_per_exit_ = 0;
};

}  // namespace agenum
