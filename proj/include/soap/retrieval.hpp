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

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "soap/embedding.hpp"

namespace soap::retrieval {

/// A unit of structured text to be indexed. Ids are "step:<n>" or
/// "scenario:<id>" for SKG-derived documents.
struct Document {
    std::string id;
    std::string text;

    bool operator==(const Document&) const = default;
};

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokens(std::string_view text) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<std::string> tokens(std::string_view text) const override;
};

struct ChunkParams {
    std::size_t chunk_size = 800;  // tokens
    std::size_t overlap = 400;     // tokens
};

/// Token range [begin, end) of one chunk.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const TokenSpan&) const = default;
};

/// Windows of `chunk_size` tokens advancing by chunk_size - overlap; the
/// last window ends at the last token. Throws InvalidChunkParams unless
/// 0 <= overlap < chunk_size.
std::vector<TokenSpan> chunk_spans(std::size_t token_count, const ChunkParams& params);

std::vector<std::string> chunk_text(std::string_view document, const ChunkParams& params = {},
                                    const Tokenizer& tokenizer = WhitespaceTokenizer{});

struct Chunk {
    int id = 0;
    std::string text;
    Vector vector;
    std::string document_id;
    std::size_t token_offset = 0;
    std::size_t token_count = 0;
};

enum class SearchMode { semantic, keyword, hybrid };

std::string_view to_string(SearchMode m);
std::optional<SearchMode> parse_search_mode(std::string_view s);

struct Hit {
    const Chunk* chunk = nullptr;
    double score = 0.0;
};

struct SearchOptions {
    SearchMode mode = SearchMode::hybrid;
    double semantic_weight = 0.5;  // hybrid = w * semantic + (1 - w) * keyword
    std::function<bool(const Chunk&)> filter;
};

/// Fraction of the query's distinct terms present in the chunk's terms.
double keyword_score(const std::vector<std::string>& query_terms, const std::vector<std::string>& chunk_terms);

/// Exact (brute-force) vector index over chunked documents. Immutable
/// after build; concurrent searches are safe.
class VectorIndex {
public:
    VectorIndex() = default;

    static VectorIndex build(const std::vector<Document>& documents, const Embedder& embedder,
                             const ChunkParams& params = {}, const Tokenizer& tokenizer = WhitespaceTokenizer{});

    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& embedder_id() const noexcept { return embedder_id_; }
    const ChunkParams& params() const noexcept { return params_; }
    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
    bool empty() const noexcept { return chunks_.empty(); }

    /// At most k hits, scores non-increasing, ties by ascending chunk id.
    /// Throws EmptyIndex on an empty index and Error when `embedder` is not
    /// the one the index was built with.
    std::vector<Hit> search(std::string_view query, std::size_t k, const Embedder& embedder,
                            const SearchOptions& options = {}) const;

    nlohmann::json to_json() const;
    static VectorIndex from_json(const nlohmann::json& j);

private:
    std::size_t dimension_ = 0;
    std::string embedder_id_;
    ChunkParams params_;
    std::vector<Chunk> chunks_;
    std::vector<std::vector<std::string>> chunk_terms_;  // sorted distinct
};

}  // namespace soap::retrieval
