#include "evplan/symbol.hpp"

#include <deque>
#include <mutex>
#include <unordered_map>

namespace evplan {
namespace {

struct SymbolTable {
    std::mutex mutex;
    std::deque<std::string> names;
    std::unordered_map<std::string, int32_t> ids;

    int32_t intern(std::string_view name) {
        std::lock_guard lock(mutex);
        auto it = ids.find(std::string(name));
        if (it != ids.end()) return it->second;
        auto id = static_cast<int32_t>(names.size());
        names.emplace_back(name);
        ids.emplace(names.back(), id);
        return id;
    }

    const std::string& name(int32_t id) {
        std::lock_guard lock(mutex);
        return names.at(static_cast<size_t>(id));
    }
};

SymbolTable& table() {
    static SymbolTable t;
    return t;
}

const std::string kInvalid = "<invalid>";

}  // namespace

Symbol::Symbol(std::string_view name) : id_(table().intern(name)) {}

const std::string& Symbol::str() const {
    if (id_ < 0) return kInvalid;
    return table().name(id_);
}

namespace values {
Symbol truth() {
    static const Symbol s("#true");
    return s;
}
Symbol falsity() {
    static const Symbol s("#false");
    return s;
}
Symbol none() {
    static const Symbol s("#none");
    return s;
}
Symbol failed() {
    static const Symbol s("#failed");
    return s;
}
}  // namespace values

}  // namespace evplan
