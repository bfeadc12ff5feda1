#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dred/error.hpp"

namespace dred {

enum class SymbolKind { Independent, Dependent, Parameter, Function };

// Immutable symbol table for one coordinate system.  Expressions store
// (kind, index) pairs that are only meaningful relative to their context;
// every reduction stage builds a fresh context.
//
// Dependent variables implicitly depend on all independents unless a
// dependency list restricts them (used after a reduction, where the new
// dependent is a function of the invariants only).  Arbitrary functions
// take exactly one dependent variable as argument and are differentiated
// formally (prime order).
class VariableContext {
 public:
  struct FunctionInfo {
    std::string name;
    int arg;  // dependent index
  };

  int independent_count() const { return static_cast<int>(independents_.size()); }
  int dependent_count() const { return static_cast<int>(dependents_.size()); }
  int parameter_count() const { return static_cast<int>(parameters_.size()); }
  int function_count() const { return static_cast<int>(functions_.size()); }

  const std::string& independent_name(int i) const { return independents_.at(i); }
  const std::string& dependent_name(int i) const { return dependents_.at(i); }
  const std::string& parameter_name(int i) const { return parameters_.at(i); }
  const std::string& function_name(int i) const { return functions_.at(i).name; }
  int function_arg(int i) const { return functions_.at(i).arg; }

  // Sorted independent indices the dependent actually depends on.
  const std::vector<int>& dependent_args(int dep) const { return dep_args_.at(dep); }

  bool depends_on(int dep, int indep) const {
    const auto& a = dep_args_.at(dep);
    for (int i : a)
      if (i == indep) return true;
    return false;
  }

  std::optional<std::pair<SymbolKind, int>> lookup(const std::string& name) const {
    for (std::size_t i = 0; i < independents_.size(); ++i)
      if (independents_[i] == name) return {{SymbolKind::Independent, static_cast<int>(i)}};
    for (std::size_t i = 0; i < dependents_.size(); ++i)
      if (dependents_[i] == name) return {{SymbolKind::Dependent, static_cast<int>(i)}};
    for (std::size_t i = 0; i < parameters_.size(); ++i)
      if (parameters_[i] == name) return {{SymbolKind::Parameter, static_cast<int>(i)}};
    for (std::size_t i = 0; i < functions_.size(); ++i)
      if (functions_[i].name == name) return {{SymbolKind::Function, static_cast<int>(i)}};
    return std::nullopt;
  }

  bool has_name(const std::string& name) const { return lookup(name).has_value(); }

  const std::string& name_of(SymbolKind kind, int index) const {
    switch (kind) {
      case SymbolKind::Independent: return independent_name(index);
      case SymbolKind::Dependent: return dependent_name(index);
      case SymbolKind::Parameter: return parameter_name(index);
      case SymbolKind::Function: return function_name(index);
    }
    throw Error("bad symbol kind");
  }

  // Derivative shorthand (u_tx) only works when letters map to variables.
  bool single_char_independents() const {
    for (const auto& n : independents_)
      if (n.size() != 1) return false;
    return true;
  }

 private:
  friend class ContextBuilder;
  std::vector<std::string> independents_;
  std::vector<std::string> dependents_;
  std::vector<std::string> parameters_;
  std::vector<FunctionInfo> functions_;
  std::vector<std::vector<int>> dep_args_;
};

using ContextPtr = std::shared_ptr<const VariableContext>;

class ContextBuilder {
 public:
  ContextBuilder& independent(const std::string& name) {
    check_fresh(name);
    ctx_.independents_.push_back(name);
    return *this;
  }

  ContextBuilder& dependent(const std::string& name) {
    check_fresh(name);
    ctx_.dependents_.push_back(name);
    dep_arg_names_.push_back({});  // empty = all independents
    return *this;
  }

  // Dependent restricted to a subset of the independents (by name).
  ContextBuilder& dependent(const std::string& name, const std::vector<std::string>& args) {
    check_fresh(name);
    ctx_.dependents_.push_back(name);
    dep_arg_names_.push_back(args);
    return *this;
  }

  ContextBuilder& parameter(const std::string& name) {
    check_fresh(name);
    ctx_.parameters_.push_back(name);
    return *this;
  }

  ContextBuilder& function(const std::string& name, const std::string& arg) {
    check_fresh(name);
    fn_decls_.push_back({name, arg});
    return *this;
  }

  ContextPtr build() const {
    auto out = std::make_shared<VariableContext>(ctx_);
    for (std::size_t d = 0; d < dep_arg_names_.size(); ++d) {
      std::vector<int> args;
      if (dep_arg_names_[d].empty()) {
        for (int i = 0; i < out->independent_count(); ++i) args.push_back(i);
      } else {
        for (const auto& a : dep_arg_names_[d]) {
          int idx = find_name(out->independents_, a);
          if (idx < 0)
            throw SemanticError("dependency of '" + out->dependents_[d] +
                                "' on undeclared independent '" + a + "'");
          args.push_back(idx);
        }
        std::sort(args.begin(), args.end());
      }
      out->dep_args_.push_back(std::move(args));
    }
    for (const auto& [name, arg] : fn_decls_) {
      int idx = find_name(out->dependents_, arg);
      if (idx < 0)
        throw SemanticError("function '" + name + "' argument '" + arg +
                            "' is not a declared dependent variable");
      out->functions_.push_back({name, idx});
    }
    return out;
  }

 private:
  static int find_name(const std::vector<std::string>& v, const std::string& n) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == n) return static_cast<int>(i);
    return -1;
  }

  void check_fresh(const std::string& name) const {
    if (name.empty()) throw SemanticError("empty symbol name");
    if (name == "D" || name == "ln" || name == "exp")
      throw SemanticError("'" + name + "' is reserved");
    auto is_start = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto is_part = [&](char c) { return is_start(c) || (c >= '0' && c <= '9'); };
    if (!is_start(name[0])) throw SemanticError("bad symbol name '" + name + "'");
    for (char c : name)
      if (!is_part(c)) throw SemanticError("bad symbol name '" + name + "'");
    for (const auto& n : ctx_.independents_)
      if (n == name) throw SemanticError("duplicate symbol '" + name + "'");
    for (const auto& n : ctx_.dependents_)
      if (n == name) throw SemanticError("duplicate symbol '" + name + "'");
    for (const auto& n : ctx_.parameters_)
      if (n == name) throw SemanticError("duplicate symbol '" + name + "'");
    for (const auto& [n, a] : fn_decls_)
      if (n == name) throw SemanticError("duplicate symbol '" + name + "'");
  }

  VariableContext ctx_;
  std::vector<std::vector<std::string>> dep_arg_names_;
  std::vector<std::pair<std::string, std::string>> fn_decls_;
};

}  // namespace dred
