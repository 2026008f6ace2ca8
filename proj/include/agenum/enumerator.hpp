#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agenum/ecs.hpp"
#include "agenum/grammar.hpp"

namespace agenum {

struct OpCounters {
  uint64_t base_inits = 0;
  uint64_t d_copies = 0;
  uint64_t product_combinations = 0;
  uint64_t endin_appends = 0;
  uint64_t ecs_nodes = 0;
};

// Stable field names: baseInits, dCopies, productCombinations, endInAppends,
// ecsNodes.
std::string counters_report(const OpCounters& c);

class PreprocessObserver {
 public:
  virtual ~PreprocessObserver() = default;
  // Positions are 0-based: the product covers [i,k) and [k,j).
  virtual void on_product(uint32_t /*i*/, uint32_t /*k*/, uint32_t /*j*/,
                          uint32_t /*rule*/) {}
};

struct PreprocessOptions {
  PreprocessObserver* observer = nullptr;
  // Re-enumerates the operands of every union and counts overlaps. Only
  // sensible for tiny inputs.
  bool check_disjoint = false;
};

// The (n+1)×(n+1)×|N| chart with its endIn lists.
class IndexTable {
 public:
  IndexTable(size_t n, size_t nonterminals);

  SetHandle& at(size_t i, size_t j, uint32_t x) {
    return cells_[(i * (n_ + 1) + j) * nt_ + x];
  }
  const SetHandle& at(size_t i, size_t j, uint32_t x) const {
    return cells_[(i * (n_ + 1) + j) * nt_ + x];
  }
  std::vector<uint32_t>& end_in(size_t j, uint32_t x) {
    return end_in_[j * nt_ + x];
  }

 private:
  size_t n_, nt_;
  std::vector<SetHandle> cells_;
  std::vector<std::vector<uint32_t>> end_in_;
};

struct PreprocessResult {
  SetHandle root;
  OpCounters counters;
  uint64_t disjointness_violations = 0;
};

// Fills the table for a nonempty w and returns I[1][n+1][S]. Throws
// Error(kEmptyInput) when w is empty.
PreprocessResult preprocess(const Grammar2NF& g2, std::u32string_view w,
                            NodeStore* store,
                            const PreprocessOptions& options = {});

// trim → 2NF → preprocess (or the ε case) → enumeration.
class Evaluation {
 public:
  Evaluation(const AnnotatedGrammar& g, std::u32string_view w,
             const PreprocessOptions& options = {});
  Evaluation(const Grammar2NF& g2, std::u32string_view w,
             const PreprocessOptions& options = {});

  bool next(Output* out);

  const OpCounters& counters() const { return result_.counters; }
  const PreprocessResult& result() const { return result_; }
  const NodeStore& store() const { return *store_; }
  uint64_t enumeration_steps() const;
  double preprocess_ms() const { return preprocess_ms_; }

 private:
  void run(const Grammar2NF& g2, std::u32string_view w,
           const PreprocessOptions& options);

  std::unique_ptr<NodeStore> store_;
  PreprocessResult result_;
  std::unique_ptr<SetEnumerator> enumerator_;
  double preprocess_ms_ = 0;
};

std::vector<Output> evaluate(const AnnotatedGrammar& g, std::u32string_view w,
                             std::optional<size_t> limit = std::nullopt);

// [[position,"annotation"],...]
std::string output_to_json(const AnnotatedGrammar& g, const Output& o);

}  // namespace agenum
