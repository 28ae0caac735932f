#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hydropencil/errors.hpp"

namespace hydropencil {

class Context;
using ContextPtr = std::shared_ptr<const Context>;

/// Names the coordinate chart: N coordinates plus optional parameters
/// (parameters take part in the polynomial ring but differentiate to zero).
/// Variable indices run coordinates first, then parameters.
class Context {
  public:
    static ContextPtr make(std::uint32_t dimension) {
        std::vector<std::string> coords;
        for (std::uint32_t i = 1; i <= dimension; ++i) coords.push_back("v" + std::to_string(i));
        return make(std::move(coords), {});
    }

    static ContextPtr make(std::vector<std::string> coords, std::vector<std::string> params) {
        if (coords.empty()) throw Error("context needs at least one coordinate");
        std::set<std::string> seen;
        for (const auto& n : coords)
            if (n.empty() || !seen.insert(n).second) throw Error("duplicate or empty coordinate name");
        for (const auto& n : params)
            if (n.empty() || !seen.insert(n).second) throw Error("duplicate or empty parameter name");
        return std::shared_ptr<const Context>(new Context(std::move(coords), std::move(params)));
    }

    ContextPtr with_parameter(const std::string& name) const {
        auto params = params_;
        params.push_back(name);
        return make(coords_, std::move(params));
    }

    std::uint32_t dimension() const { return static_cast<std::uint32_t>(coords_.size()); }
    std::uint32_t nparams() const { return static_cast<std::uint32_t>(params_.size()); }
    std::uint32_t nvars() const { return dimension() + nparams(); }

    const std::vector<std::string>& coordinates() const { return coords_; }
    const std::vector<std::string>& parameters() const { return params_; }

    const std::string& var_name(std::uint32_t idx) const {
        return idx < coords_.size() ? coords_[idx] : params_[idx - coords_.size()];
    }

    bool is_parameter(std::uint32_t idx) const { return idx >= coords_.size(); }

    std::optional<std::uint32_t> find(const std::string& name) const {
        for (std::uint32_t i = 0; i < coords_.size(); ++i)
            if (coords_[i] == name) return i;
        for (std::uint32_t i = 0; i < params_.size(); ++i)
            if (params_[i] == name) return dimension() + i;
        return std::nullopt;
    }

    std::uint32_t coordinate_index(const std::string& name) const {
        auto idx = find(name);
        if (!idx || is_parameter(*idx)) throw UnknownIdentifier(name);
        return *idx;
    }

    friend bool operator==(const Context& a, const Context& b) {
        return a.coords_ == b.coords_ && a.params_ == b.params_;
    }

  private:
    Context(std::vector<std::string> coords, std::vector<std::string> params)
        : coords_(std::move(coords)), params_(std::move(params)) {}

    std::vector<std::string> coords_;
    std::vector<std::string> params_;
};

inline bool same_context(const ContextPtr& a, const ContextPtr& b) {
    return a == b || (a && b && *a == *b);
}

}  // namespace hydropencil
