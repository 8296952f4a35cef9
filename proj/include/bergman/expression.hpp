#pragma once

// Small expression language for chart functions of z_1..z_n and their
// conjugates. Grammar in docs/expression-grammar.md.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "bergman/jet.hpp"

namespace bergman {

class Expression {
 public:
  struct Node;

  Expression() = default;
  // Throws Error(ParseError) with a 1-based column on malformed input.
  static Expression parse(std::string_view source, int n,
                          const std::map<std::string, double>& constants = {});

  int n() const noexcept { return n_; }
  const std::string& source() const noexcept { return source_; }
  bool empty() const noexcept { return !root_; }
  bool depends_on_z() const;

  cplx eval(std::span<const cplx> z) const;
  // Jet at z0 computed by exact jet arithmetic.
  WirtingerJet eval_jet(std::span<const cplx> z0, int order) const;

 private:
  int n_ = 0;
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace bergman
