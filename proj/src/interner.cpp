#include "rbqa/interner.hpp"

#include <stdexcept>

namespace rbqa {

Interner& Interner::global() {
    static Interner instance;
    return instance;
}

Symbol Interner::intern(std::string_view text) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string key(text);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    Symbol sym = static_cast<Symbol>(texts_.size());
    texts_.push_back(key);
    ids_.emplace(std::move(key), sym);
    return sym;
}

const std::string& Interner::text(Symbol sym) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (sym >= texts_.size()) throw std::out_of_range("unknown symbol");
    return texts_[sym];
}

Symbol intern(std::string_view text) { return Interner::global().intern(text); }

const std::string& symbol_text(Symbol sym) { return Interner::global().text(sym); }

} // namespace rbqa
