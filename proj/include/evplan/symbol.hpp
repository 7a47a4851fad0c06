#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace evplan {

/// Interned name. Equality and ordering are by intern id, which is stable for
/// the lifetime of the process; use lexical_less() when name order matters.
class Symbol {
public:
    Symbol() = default;
    explicit Symbol(std::string_view name);

    int32_t id() const { return id_; }
    bool valid() const { return id_ >= 0; }
    const std::string& str() const;

    auto operator<=>(const Symbol&) const = default;

    static Symbol from_id(int32_t id) {
        Symbol s;
        s.id_ = id;
        return s;
    }

private:
    int32_t id_ = -1;
};

inline bool lexical_less(Symbol a, Symbol b) { return a.str() < b.str(); }

/// Reserved values used for state variables.
namespace values {
Symbol truth();
Symbol falsity();
Symbol none();
Symbol failed();
}  // namespace values

}  // namespace evplan

template <>
struct std::hash<evplan::Symbol> {
    size_t operator()(evplan::Symbol s) const noexcept { return std::hash<int32_t>{}(s.id()); }
};
