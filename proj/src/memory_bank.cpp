#include "dacl/memory_bank.hpp"

#include <algorithm>
#include <fstream>

#include "dacl/binio.hpp"
#include "dacl/errors.hpp"

namespace dacl {

ClassMemoryBank::ClassMemoryBank(int class_id, std::size_t capacity)
    : class_id_(class_id), capacity_(capacity) {
    if (capacity == 0) throw ConfigError("memory bank: capacity must be >= 1");
}

void ClassMemoryBank::push(std::vector<ClassEmbedding> items) {
    for (const auto& e : items) {
        if (e.class_id != class_id_) {
            throw ContractError("bank push: class " + std::to_string(e.class_id) +
                                " item into class " + std::to_string(class_id_) + " bank");
        }
        if (!e.density.has_value()) {
            throw ContractError("bank push: item seq_id " + std::to_string(e.seq_id) +
                                " has no density stamp");
        }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const ClassEmbedding& a, const ClassEmbedding& b) { return a.seq_id < b.seq_id; });
    for (auto& e : items) {
        e.origin = ClassEmbedding::Origin::Bank;
        ring_.push_back(std::move(e));
        if (ring_.size() > capacity_) ring_.pop_front();
    }
}

std::vector<ClassEmbedding> ClassMemoryBank::snapshot() const {
    return {ring_.begin(), ring_.end()};
}

BankSet make_bank_set(int n_classes, std::size_t capacity) {
    if (n_classes < 1) throw ConfigError("bank set: need >= 1 class");
    BankSet set;
    set.banks.reserve(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) set.banks.emplace_back(c, capacity);
    return set;
}

std::vector<ClassEmbedding> union_pool(const std::vector<ClassEmbedding>& bank_snapshot,
                                       const std::vector<ClassEmbedding>& batch) {
    int cls = !bank_snapshot.empty() ? bank_snapshot[0].class_id
              : !batch.empty()       ? batch[0].class_id
                                     : 0;
    std::vector<ClassEmbedding> pool;
    pool.reserve(bank_snapshot.size() + batch.size());
    for (const auto& e : bank_snapshot) {
        if (e.class_id != cls) throw ContractError("union_pool: mixed classes in bank snapshot");
        pool.push_back(e);
    }
    for (const auto& e : batch) {
        if (e.class_id != cls) throw ContractError("union_pool: mixed classes in batch");
        pool.push_back(e);
    }
    return pool;
}

void save_banks(const BankSet& banks, std::size_t d_proj, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("bank dump: cannot open " + path);
    io::write_magic(os, "DACLBANK");
    io::write_u32(os, 1);  // version
    io::write_u32(os, static_cast<std::uint32_t>(banks.banks.size()));
    io::write_u32(os, static_cast<std::uint32_t>(banks.banks.empty() ? 0 : banks.banks[0].capacity()));
    io::write_u32(os, static_cast<std::uint32_t>(d_proj));
    for (const auto& bank : banks.banks) {
        auto snap = bank.snapshot();
        io::write_u32(os, static_cast<std::uint32_t>(snap.size()));
        for (const auto& e : snap) {
            if (e.vec.size() != d_proj) {
                throw ContractError("bank dump: embedding dim " + std::to_string(e.vec.size()) +
                                    " expected " + std::to_string(d_proj));
            }
            io::write_u64(os, e.seq_id);
            io::write_f64(os, *e.density);
            for (double v : e.vec) io::write_f64(os, v);
        }
    }
    if (!os) throw ContractError("bank dump: write failed for " + path);
}

BankSet load_banks(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContractError("bank load: cannot open " + path);
    io::expect_magic(is, "DACLBANK");
    const std::uint32_t version = io::read_u32(is);
    if (version != 1) throw ContractError("bank load: unsupported version " + std::to_string(version));
    const std::uint32_t n = io::read_u32(is);
    const std::uint32_t cap = io::read_u32(is);
    const std::uint32_t d_proj = io::read_u32(is);
    BankSet set = make_bank_set(static_cast<int>(n), cap);
    for (std::uint32_t c = 0; c < n; ++c) {
        const std::uint32_t count = io::read_u32(is);
        std::vector<ClassEmbedding> items;
        items.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            ClassEmbedding e;
            e.class_id = static_cast<int>(c);
            e.origin = ClassEmbedding::Origin::Bank;
            e.seq_id = io::read_u64(is);
            e.density = io::read_f64(is);
            e.vec.resize(d_proj);
            for (auto& v : e.vec) v = io::read_f64(is);
            items.push_back(std::move(e));
        }
        set.banks[c].push(std::move(items));
    }
    return set;
}

}  // namespace dacl
