#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rbqa {

// Interned identifier for relation names, variables, constants and method
// names. Ids are assigned in first-intern order, so runs over the same input
// produce the same ids and therefore byte-identical output.
using Symbol = std::uint32_t;

class Interner {
public:
    static Interner& global();

    Symbol intern(std::string_view text);
    const std::string& text(Symbol sym) const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> texts_;
    std::unordered_map<std::string, Symbol> ids_;
};

Symbol intern(std::string_view text);
const std::string& symbol_text(Symbol sym);

} // namespace rbqa
