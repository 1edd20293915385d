#include "hola/bipartition.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace hola {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// All perfect matchings of `elems`, pairing the smallest free element first.
void gen_matchings(std::vector<int>& elems,
                   std::vector<std::array<int, 2>>& current,
                   const std::function<void(const std::vector<std::array<int, 2>>&)>& emit) {
    if (elems.empty()) {
        emit(current);
        return;
    }
    int first = elems.front();
    for (std::size_t i = 1; i < elems.size(); ++i) {
        int partner = elems[i];
        std::vector<int> rest;
        rest.reserve(elems.size() - 2);
        for (std::size_t j = 1; j < elems.size(); ++j)
            if (j != i) rest.push_back(elems[j]);
        current.push_back({first, partner});
        gen_matchings(rest, current, emit);
        current.pop_back();
    }
}

void for_each_matching(int n_elems,
                       const std::function<void(const std::vector<std::array<int, 2>>&)>& emit) {
    std::vector<int> elems(n_elems);
    std::iota(elems.begin(), elems.end(), 0);
    std::vector<std::array<int, 2>> current;
    gen_matchings(elems, current, emit);
}

// Integer partitions of total into parts >= 3, non-increasing.
void gen_size_profiles(int total, int max_part, std::vector<int>& current,
                       std::vector<std::vector<int>>& out) {
    if (total == 0) {
        out.push_back(current);
        return;
    }
    for (int part = std::min(total, max_part); part >= 3; --part) {
        if (total - part != 0 && total - part < 3) continue;
        current.push_back(part);
        gen_size_profiles(total - part, part, current, out);
        current.pop_back();
    }
}

std::int64_t factorial(int n) {
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Number of set partitions of {1..total} with the given block-size profile.
std::int64_t profile_partition_count(const std::vector<int>& sizes) {
    int total = std::accumulate(sizes.begin(), sizes.end(), 0);
    std::int64_t count = factorial(total);
    for (int s : sizes) count /= factorial(s);
    int run = 1;
    for (std::size_t i = 1; i <= sizes.size(); ++i) {
        if (i < sizes.size() && sizes[i] == sizes[i - 1]) {
            ++run;
        } else {
            count /= factorial(run);
            run = 1;
        }
    }
    return count;
}

Bipartition canonical_p_bipartition(const std::vector<int>& sizes,
                                    const std::vector<std::array<int, 2>>& q) {
    Bipartition b;
    int next = 0;
    for (int s : sizes) {
        std::vector<int> block(s);
        std::iota(block.begin(), block.end(), next);
        next += s;
        b.p_blocks.push_back(std::move(block));
    }
    b.q_pairs = q;
    return b;
}

// All set partitions of {0..n-1} into exactly v blocks of size >= 3, via
// restricted-growth strings.
void gen_p_partitions(int n, int v, std::vector<std::vector<std::vector<int>>>& out) {
    std::vector<int> rgs(n, 0);
    std::function<void(int, int)> rec = [&](int pos, int max_used) {
        if (pos == n) {
            if (max_used + 1 != v) return;
            std::vector<std::vector<int>> blocks(v);
            for (int i = 0; i < n; ++i) blocks[rgs[i]].push_back(i);
            for (const auto& blk : blocks)
                if (static_cast<int>(blk.size()) < 3) return;
            out.push_back(std::move(blocks));
            return;
        }
        for (int c = 0; c <= std::min(max_used + 1, v - 1); ++c) {
            rgs[pos] = c;
            rec(pos + 1, std::max(max_used, c));
        }
    };
    rec(0, -1);
}

}  // namespace

void Bipartition::validate() const {
    const int n = ground_size();
    std::vector<int> seen(n, 0);
    for (const auto& blk : p_blocks) {
        if (blk.size() < 3) throw std::invalid_argument("P-block smaller than 3");
        for (int e : blk) {
            if (e < 0 || e >= n) throw std::invalid_argument("P element out of range");
            ++seen[e];
        }
    }
    for (int c : seen)
        if (c != 1) throw std::invalid_argument("P-blocks do not partition the ground set");
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& pr : q_pairs) {
        for (int e : pr) {
            if (e < 0 || e >= n) throw std::invalid_argument("Q element out of range");
            ++seen[e];
        }
        if (pr[0] == pr[1]) throw std::invalid_argument("Q-pair with repeated element");
    }
    for (int c : seen)
        if (c != 1) throw std::invalid_argument("Q-pairs are not a perfect matching");
}

bool is_connected(const Bipartition& b) {
    const int n = b.ground_size();
    UnionFind uf(n);
    for (const auto& blk : b.p_blocks)
        for (std::size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0], blk[i]);
    for (const auto& pr : b.q_pairs) uf.unite(pr[0], pr[1]);
    int root = uf.find(0);
    for (int i = 1; i < n; ++i)
        if (uf.find(i) != root) return false;
    return true;
}

std::string canonical_signature(const Bipartition& b) {
    const int v = b.num_blocks();
    std::vector<int> block_of(b.ground_size(), -1);
    for (int p = 0; p < v; ++p)
        for (int e : b.p_blocks[p]) block_of[e] = p;

    std::vector<int> sizes(v);
    for (int p = 0; p < v; ++p) sizes[p] = static_cast<int>(b.p_blocks[p].size());
    std::vector<int> sorted_sizes = sizes;
    std::sort(sorted_sizes.begin(), sorted_sizes.end(), std::greater<int>());

    // Try every vertex relabeling consistent with the sorted size sequence
    // and keep the lexicographically smallest edge multiset.
    std::vector<int> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        bool size_ok = true;
        for (int p = 0; p < v; ++p) {
            // perm[p] is the new label of original block p.
            if (sizes[p] != sorted_sizes[perm[p]]) {
                size_ok = false;
                break;
            }
        }
        if (!size_ok) continue;
        std::vector<std::array<int, 2>> edges;
        edges.reserve(b.q_pairs.size());
        for (const auto& pr : b.q_pairs) {
            int a = perm[block_of[pr[0]]];
            int c = perm[block_of[pr[1]]];
            edges.push_back({std::min(a, c), std::max(a, c)});
        }
        std::sort(edges.begin(), edges.end());
        std::string key;
        for (int s : sorted_sizes) key += std::to_string(s) + ",";
        key += "/";
        for (const auto& e : edges)
            key += std::to_string(e[0]) + "-" + std::to_string(e[1]) + ",";
        if (best.empty() || key < best) best = key;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<BipartitionClass> enumerate_connected_level(int level, int max_m) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    const int needed_m = 3 * level;
    if (max_m < 0) max_m = needed_m;
    if (max_m < needed_m)
        throw std::invalid_argument("max_m = " + std::to_string(max_m) +
                                    " cannot cover level " + std::to_string(level) +
                                    "; need max_m >= " + std::to_string(needed_m));

    std::vector<BipartitionClass> classes;
    for (int v = 1; v <= 2 * level; ++v) {
        const int m = v + level;
        const int ground = 2 * m;
        std::vector<std::vector<int>> profiles;
        {
            std::vector<int> cur;
            gen_size_profiles(ground, ground, cur, profiles);
        }
        for (const auto& profile : profiles) {
            if (static_cast<int>(profile.size()) != v) continue;
            std::int64_t n_partitions = profile_partition_count(profile);
            // With P fixed to one canonical partition of this profile, count
            // matchings per class; the total class size is that count times
            // the number of partitions sharing the profile.
            std::map<std::string, std::pair<Bipartition, std::int64_t>> found;
            for_each_matching(ground, [&](const std::vector<std::array<int, 2>>& q) {
                Bipartition b = canonical_p_bipartition(profile, q);
                if (!is_connected(b)) return;
                std::string sig = canonical_signature(b);
                auto it = found.find(sig);
                if (it == found.end())
                    found.emplace(sig, std::make_pair(std::move(b), std::int64_t{1}));
                else
                    ++it->second.second;
            });
            for (auto& [sig, rep_count] : found) {
                BipartitionClass cls;
                cls.representative = std::move(rep_count.first);
                cls.multiplicity = n_partitions * rep_count.second;
                cls.signature = sig;
                classes.push_back(std::move(cls));
            }
        }
    }
    return classes;
}

const std::vector<BipartitionClass>& level_catalog(int level) {
    static std::mutex mu;
    static std::map<int, std::vector<BipartitionClass>> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(level);
    if (it == cache.end())
        it = cache.emplace(level, enumerate_connected_level(level)).first;
    return it->second;
}

std::vector<Bipartition> enumerate_connected_exhaustive(int level, int max_ground) {
    if (max_ground > 8)
        throw std::invalid_argument("exhaustive enumeration supported for 2m <= 8 only");
    std::vector<Bipartition> out;
    for (int v = 1; v <= 2 * level; ++v) {
        const int m = v + level;
        const int ground = 2 * m;
        if (ground > max_ground) continue;
        std::vector<std::vector<std::vector<int>>> partitions;
        gen_p_partitions(ground, v, partitions);
        for (const auto& p : partitions) {
            for_each_matching(ground, [&](const std::vector<std::array<int, 2>>& q) {
                Bipartition b;
                b.p_blocks = p;
                b.q_pairs = q;
                if (is_connected(b)) out.push_back(std::move(b));
            });
        }
    }
    return out;
}

std::string catalog_csv(int max_level) {
    std::string csv = "level,v,m,multiplicity,p_blocks,q_blocks\n";
    for (int level = 1; level <= max_level; ++level) {
        for (const auto& cls : level_catalog(level)) {
            const Bipartition& b = cls.representative;
            std::string p_str, q_str;
            for (std::size_t i = 0; i < b.p_blocks.size(); ++i) {
                if (i) p_str += "|";
                for (std::size_t j = 0; j < b.p_blocks[i].size(); ++j) {
                    if (j) p_str += " ";
                    p_str += std::to_string(b.p_blocks[i][j] + 1);
                }
            }
            for (std::size_t i = 0; i < b.q_pairs.size(); ++i) {
                if (i) q_str += "|";
                q_str += std::to_string(b.q_pairs[i][0] + 1) + " " +
                         std::to_string(b.q_pairs[i][1] + 1);
            }
            char line[256];
            std::snprintf(line, sizeof(line), "%d,%d,%d,%lld,%s,%s\n", level,
                          b.num_blocks(), b.num_pairs(),
                          static_cast<long long>(cls.multiplicity), p_str.c_str(),
                          q_str.c_str());
            csv += line;
        }
    }
    return csv;
}

}  // namespace hola
