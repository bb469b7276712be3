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

#include "soap/retrieval.hpp"

#include <algorithm>

#include "soap/errors.hpp"
#include "soap/text.hpp"

namespace soap::retrieval {

namespace {

std::vector<std::string> distinct_terms(std::string_view s) {
    auto t = text::term_tokens(s);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

}  // namespace

std::vector<std::string> WhitespaceTokenizer::tokens(std::string_view text) const {
    return text::whitespace_tokens(text);
}

std::vector<TokenSpan> chunk_spans(std::size_t token_count, const ChunkParams& params) {
    if (params.chunk_size == 0 || params.overlap >= params.chunk_size) {
        throw InvalidChunkParams("need 0 <= overlap < chunk_size (got chunk_size=" + std::to_string(params.chunk_size) +
                                 ", overlap=" + std::to_string(params.overlap) + ")");
    }
    std::vector<TokenSpan> spans;
    if (token_count == 0) return spans;
    const std::size_t stride = params.chunk_size - params.overlap;
    for (std::size_t begin = 0;; begin += stride) {
        std::size_t end = std::min(begin + params.chunk_size, token_count);
        spans.push_back({begin, end});
        if (end == token_count) break;
    }
    return spans;
}

std::vector<std::string> chunk_text(std::string_view document, const ChunkParams& params, const Tokenizer& tokenizer) {
    auto tokens = tokenizer.tokens(document);
    std::vector<std::string> out;
    for (const auto& span : chunk_spans(tokens.size(), params)) {
        std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                        tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
        out.push_back(text::join(window, " "));
    }
    return out;
}

std::string_view to_string(SearchMode m) {
    switch (m) {
        case SearchMode::semantic: return "semantic";
        case SearchMode::keyword: return "keyword";
        case SearchMode::hybrid: return "hybrid";
    }
    return "hybrid";
}

std::optional<SearchMode> parse_search_mode(std::string_view s) {
    if (s == "semantic") return SearchMode::semantic;
    if (s == "keyword") return SearchMode::keyword;
    if (s == "hybrid") return SearchMode::hybrid;
    return std::nullopt;
}

double keyword_score(const std::vector<std::string>& query_terms, const std::vector<std::string>& chunk_terms) {
    if (query_terms.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& q : query_terms) {
        if (std::binary_search(chunk_terms.begin(), chunk_terms.end(), q)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(query_terms.size());
}

VectorIndex VectorIndex::build(const std::vector<Document>& documents, const Embedder& embedder,
                               const ChunkParams& params, const Tokenizer& tokenizer) {
    VectorIndex index;
    index.dimension_ = embedder.dimension();
    index.embedder_id_ = embedder.id();
    index.params_ = params;
    int next_id = 0;
    for (const auto& doc : documents) {
        auto tokens = tokenizer.tokens(doc.text);
        for (const auto& span : chunk_spans(tokens.size(), params)) {
            std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                            tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
            Chunk c;
            c.id = next_id++;
            c.text = text::join(window, " ");
            c.vector = embedder.embed(c.text);
            if (c.vector.size() != index.dimension_) {
                throw EmbedderFailure(c.text, "embedder returned a vector of the wrong dimension");
            }
            c.document_id = doc.id;
            c.token_offset = span.begin;
            c.token_count = span.end - span.begin;
            index.chunk_terms_.push_back(distinct_terms(c.text));
            index.chunks_.push_back(std::move(c));
        }
    }
    return index;
}

std::vector<Hit> VectorIndex::search(std::string_view query, std::size_t k, const Embedder& embedder,
                                     const SearchOptions& options) const {
    if (chunks_.empty()) throw EmptyIndex();
    if (embedder.id() != embedder_id_) {
        throw Error("index was built with embedder '" + embedder_id_ + "', not '" + embedder.id() + "'");
    }
    const bool need_vector = options.mode != SearchMode::keyword;
    Vector qv;
    if (need_vector) qv = embedder.embed(query);
    auto q_terms = distinct_terms(query);

    std::vector<Hit> hits;
    hits.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        const auto& c = chunks_[i];
        if (options.filter && !options.filter(c)) continue;
        double score = 0.0;
        switch (options.mode) {
            case SearchMode::semantic: score = cosine(qv, c.vector); break;
            case SearchMode::keyword: score = keyword_score(q_terms, chunk_terms_[i]); break;
            case SearchMode::hybrid:
                score = options.semantic_weight * cosine(qv, c.vector) +
                        (1.0 - options.semantic_weight) * keyword_score(q_terms, chunk_terms_[i]);
                break;
        }
        hits.push_back({&c, score});
    }
    auto order = [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk->id < b.chunk->id;
    };
    if (k < hits.size()) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), order);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), order);
    }
    return hits;
}

nlohmann::json VectorIndex::to_json() const {
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& c : chunks_) {
        chunks.push_back({{"id", c.id},
                          {"document", c.document_id},
                          {"offset", c.token_offset},
                          {"tokens", c.token_count},
                          {"text", c.text},
                          {"vector", c.vector}});
    }
    return {{"embedder", embedder_id_},
            {"dimension", dimension_},
            {"chunk_size", params_.chunk_size},
            {"overlap", params_.overlap},
            {"chunks", std::move(chunks)}};
}

VectorIndex VectorIndex::from_json(const nlohmann::json& j) {
    VectorIndex index;
    index.embedder_id_ = j.at("embedder").get<std::string>();
    index.dimension_ = j.at("dimension").get<std::size_t>();
    index.params_.chunk_size = j.at("chunk_size").get<std::size_t>();
    index.params_.overlap = j.at("overlap").get<std::size_t>();
    for (const auto& jc : j.at("chunks")) {
        Chunk c;
        c.id = jc.at("id").get<int>();
        c.document_id = jc.at("document").get<std::string>();
        c.token_offset = jc.at("offset").get<std::size_t>();
        c.token_count = jc.at("tokens").get<std::size_t>();
        c.text = jc.at("text").get<std::string>();
        c.vector = jc.at("vector").get<Vector>();
        if (c.vector.size() != index.dimension_) throw Error("index chunk " + std::to_string(c.id) + " has wrong dimension");
        index.chunk_terms_.push_back(distinct_terms(c.text));
        index.chunks_.push_back(std::move(c));
    }
    return index;
}

}  // namespace soap::retrieval
