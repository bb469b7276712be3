/*
 * Copyright 2026 The soap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace soap::testing {

namespace {

double plain_cosine(const Vector& a, const Vector& b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    return na == 0 || nb == 0 ? 0.0 : d / std::sqrt(na * nb);
}

}  // namespace

Partition components_oracle(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder,
                            double threshold) {
    std::vector<std::string> texts;
    for (const auto& sc : scenarios)
        for (const auto& s : sc.steps)
            if (std::find(texts.begin(), texts.end(), s) == texts.end()) texts.push_back(s);
    const auto n = texts.size();
    std::vector<Vector> v;
    for (const auto& t : texts) v.push_back(embedder.embed(t));
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && plain_cosine(v[a], v[b]) >= threshold) adj[a][b] = true;
    std::vector<bool> seen(n, false);
    Partition out;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::set<std::string> comp;
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            auto x = stack.back();
            stack.pop_back();
            comp.insert(texts[x]);
            for (std::size_t y = 0; y < n; ++y)
                if (adj[x][y] && !seen[y]) {
                    seen[y] = true;
                    stack.push_back(y);
                }
        }
        out.insert(comp);
    }
    return out;
}

Partition partition_of(const skg::Normalization& n) {
    Partition p;
    for (const auto& s : n.steps) p.insert(s.alternatives);
    return p;
}

std::vector<std::string> partition_problems(const skg::Normalization& n,
                                            const std::vector<corpus::Scenario>& scenarios) {
    std::vector<std::string> out;
    std::set<std::string> raw;
    for (const auto& sc : scenarios) raw.insert(sc.steps.begin(), sc.steps.end());
    std::set<std::string> covered;
    std::size_t total = 0;
    for (std::size_t i = 0; i < n.steps.size(); ++i) {
        const auto& s = n.steps[i];
        if (s.id != static_cast<int>(i + 1)) out.push_back(fmt::format("step {} has id {}", i + 1, s.id));
        if (s.alternatives.empty()) out.push_back(fmt::format("step {} is empty", s.id));
        if (!s.alternatives.contains(s.canonical)) out.push_back(fmt::format("step {} canonical not a member", s.id));
        covered.insert(s.alternatives.begin(), s.alternatives.end());
        total += s.alternatives.size();
        for (const auto& a : s.alternatives) {
            auto it = n.step_of.find(a);
            if (it == n.step_of.end() || it->second != s.id) out.push_back("step_of disagrees for '" + a + "'");
        }
    }
    if (covered != raw) out.push_back("clusters do not cover exactly the raw steps");
    if (total != raw.size()) out.push_back("clusters overlap");
    return out;
}

std::vector<ScanHit> full_cosine_scan(const retrieval::VectorIndex& index, const std::string& query, std::size_t k,
                                      const Embedder& embedder) {
    auto q = embedder.embed(query);
    std::vector<ScanHit> all;
    for (const auto& c : index.chunks()) all.push_back({c.id, plain_cosine(q, embedder.embed(c.text))});
    std::sort(all.begin(), all.end(), [](const ScanHit& a, const ScanHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

namespace {

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words{
        "open", "tap", "the", "tabs", "tray", "menu", "close", "tab", "settings", "go", "to", "reload", "page",
        "three", "dots", "bookmark", "history", "scroll", "down", "search", "private", "share", "download",
        "thumbnail", "undo", "banner", "toolbar", "address", "bar", "keyboard"};
    return words;
}

}  // namespace

std::vector<retrieval::Document> random_documents(std::mt19937& rng, int count, int max_tokens) {
    const auto& words = vocabulary();
    std::uniform_int_distribution<int> len(1, max_tokens), pick(0, static_cast<int>(words.size()) - 1);
    std::vector<retrieval::Document> docs;
    for (int i = 0; i < count; ++i) {
        std::string t;
        for (int w = len(rng); w > 0; --w) t += (t.empty() ? "" : " ") + words[pick(rng)];
        docs.push_back({"doc:" + std::to_string(i), t});
    }
    return docs;
}

std::vector<corpus::Scenario> random_scenarios(std::mt19937& rng, int count) {
    const auto& words = vocabulary();
    std::uniform_int_distribution<int> len(2, 5), pick(0, 14), steps(1, 6);
    std::vector<corpus::Scenario> out;
    for (int i = 0; i < count; ++i) {
        corpus::Scenario sc;
        sc.id = "r" + std::to_string(i);
        sc.summary = "random " + std::to_string(i);
        for (int k = steps(rng); k > 0; --k) {
            std::string step;
            for (int w = len(rng); w > 0; --w) step += (step.empty() ? "" : " ") + words[pick(rng)];
            sc.steps.push_back(step);
        }
        sc.oracles.push_back("oracle " + std::to_string(i));
        out.push_back(sc);
    }
    return out;
}

std::vector<std::string> chunk_coverage_problems(const std::vector<retrieval::TokenSpan>& spans, std::size_t tokens,
                                                 const retrieval::ChunkParams& params) {
    std::vector<std::string> out;
    if (tokens == 0) {
        if (!spans.empty()) out.push_back("chunks for an empty document");
        return out;
    }
    if (spans.empty()) return {"no chunks"};
    if (spans.front().begin != 0) out.push_back("first chunk does not start at 0");
    if (spans.back().end != tokens) out.push_back("last chunk does not end at the last token");
    std::vector<bool> covered(tokens, false);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& s = spans[i];
        if (s.begin >= s.end || s.end > tokens) out.push_back(fmt::format("chunk {} out of range", i));
        if (s.end - s.begin > params.chunk_size) out.push_back(fmt::format("chunk {} too long", i));
        if (i > 0 && s.begin != spans[i - 1].begin + (params.chunk_size - params.overlap))
            out.push_back(fmt::format("chunk {} does not advance by the stride", i));
        if (i + 1 < spans.size() && s.end - s.begin != params.chunk_size)
            out.push_back(fmt::format("inner chunk {} shorter than chunk_size", i));
        for (auto t = s.begin; t < s.end && t < tokens; ++t) covered[t] = true;
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) out.push_back("uncovered token");
    return out;
}

bool instruction_allowed(device::Action action, bool position, TextArg text, bool direction) {
    using device::Action;
    const bool no_text = text == TextArg::absent;
    switch (action) {
        case Action::tap:
        case Action::long_tap:
        case Action::double_tap: return position && no_text && !direction;
        case Action::input: return position && text == TextArg::nonempty && !direction;
        case Action::scroll: return !position && no_text && direction;
        case Action::home:
        case Action::enter:
        case Action::landscape:
        case Action::portrait: return !position && no_text && !direction;
    }
    return false;
}

std::vector<std::string> grid_problems(int width, int height, int cell_size) {
    std::vector<std::string> out;
    auto g = device::make_grid(width, height, cell_size);
    int cols = (width + cell_size - 1) / cell_size;
    int rows = (height + cell_size - 1) / cell_size;
    if (g.columns != cols || g.rows != rows) out.push_back("wrong grid dimensions");
    std::set<std::pair<int, int>> cells;
    for (int label = 1; label <= g.label_count(); ++label) {
        auto c = device::label_to_cell(label, g);
        if (c.row < 0 || c.row >= rows || c.col < 0 || c.col >= cols) out.push_back(fmt::format("label {} off grid", label));
        if (!cells.insert({c.row, c.col}).second) out.push_back(fmt::format("label {} reuses a cell", label));
        if (device::cell_to_label(c, g) != label) out.push_back(fmt::format("label {} does not round-trip", label));
        auto p = device::label_to_coords(label, g);
        auto r = device::cell_rect(label, g);
        int x0 = c.col * cell_size, y0 = c.row * cell_size;
        if (r.x0 != x0 || r.y0 != y0 || r.x1 != std::min(x0 + cell_size, width) || r.y1 != std::min(y0 + cell_size, height))
            out.push_back(fmt::format("label {} has the wrong rectangle", label));
        if (!r.contains(p)) out.push_back(fmt::format("label {} center outside its cell", label));
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) out.push_back(fmt::format("label {} off screen", label));
        if (device::label_at(p, g) != label) out.push_back(fmt::format("label {} center maps elsewhere", label));
        if (out.size() > 10) break;
    }
    if (static_cast<int>(cells.size()) != cols * rows) out.push_back("cells not covered once each");
    return out;
}

}  // namespace soap::testing
