#pragma once

#include "commitlink/common/http.hpp"
#include "commitlink/corpus/records.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace commitlink::retrieval {

using Vector = std::vector<float>;

/// Text -> unit vector. Implementations are deterministic: identical text
/// always yields the identical vector, and dim() never changes.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::size_t dim() const = 0;

    /// One unit vector per text, in order. Throws RemoteError (retriable)
    /// when a backing service fails.
    virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;

    /// Identifies the provider and its settings for cache keys.
    virtual std::string fingerprint() const = 0;

    Vector embed_one(const std::string& text);
};

/// Offline provider: signed feature hashing of tokens into `dim` buckets,
/// then L2 normalisation. Texts without tokens map to a fixed unit vector.
class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dim = 384, std::uint64_t seed = 0);

    std::size_t dim() const override { return dim_; }
    std::vector<Vector> embed(std::span<const std::string> texts) override;
    std::string fingerprint() const override;

private:
    Vector embed_text(const std::string& text) const;

    std::size_t dim_;
    std::uint64_t seed_;
};

/// Remote provider: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
/// Returned vectors are checked for dimension and re-normalised.
class HttpEmbedder final : public EmbeddingProvider {
public:
    HttpEmbedder(EndpointConfig endpoint, std::size_t dim, std::size_t batch_size = 64, std::string model = {});

    std::size_t dim() const override { return dim_; }
    std::vector<Vector> embed(std::span<const std::string> texts) override;
    std::string fingerprint() const override;

private:
    JsonEndpoint endpoint_;
    std::size_t dim_;
    std::size_t batch_size_;
    std::string model_;
};

/// Scales v to unit length. Returns false for a zero vector.
bool normalize(Vector& v);

double dot(std::span<const float> a, std::span<const float> b);

/// One unit vector per document, keyed by doc_id. A provider failure is
/// rethrown as RemoteError naming the first doc_id of the failing batch.
std::map<std::string, Vector> embed_documents(EmbeddingProvider& provider, std::span<const corpus::Document> docs,
                                              std::size_t batch_size = 256);

} // namespace commitlink::retrieval
