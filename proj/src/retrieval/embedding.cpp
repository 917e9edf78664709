#include "commitlink/retrieval/embedding.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/common/hash.hpp"
#include "commitlink/retrieval/tokenizer.hpp"

#include <cmath>

namespace commitlink::retrieval {

Vector EmbeddingProvider::embed_one(const std::string& text) {
    auto out = embed(std::span(&text, 1));
    if (out.size() != 1) {
        throw RemoteError("embedding provider returned " + std::to_string(out.size()) + " vectors for one text");
    }
    return std::move(out.front());
}

bool normalize(Vector& v) {
    double norm = 0.0;
    for (const float x : v) {
        norm += static_cast<double>(x) * x;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0 || !std::isfinite(norm)) {
        return false;
    }
    for (float& x : v) {
        x = static_cast<float>(x / norm);
    }
    return true;
}

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += static_cast<double>(a[i]) * b[i];
    }
    return s;
}

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) {
        throw ConfigError("embedding dimension must be positive");
    }
}

Vector HashingEmbedder::embed_text(const std::string& text) const {
    Vector v(dim_, 0.0f);
    auto add = [&](std::string_view token) {
        const auto h = fnv1a64(token, 0xcbf29ce484222325ULL ^ seed_);
        const auto bucket = static_cast<std::size_t>(h % dim_);
        v[bucket] += (h >> 63) ? 1.0f : -1.0f;
    };
    const auto tokens = tokenize(text);
    for (const auto& t : tokens) {
        add(t);
    }
    if (tokens.empty() || !normalize(v)) {
        std::fill(v.begin(), v.end(), 0.0f);
        add("\x01<empty>");
        normalize(v);
    }
    return v;
}

std::vector<Vector> HashingEmbedder::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed_text(t));
    }
    return out;
}

std::string HashingEmbedder::fingerprint() const {
    return "hashing:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_) +
           ":stopwords=v" + std::to_string(kStopwordListVersion);
}

HttpEmbedder::HttpEmbedder(EndpointConfig endpoint, std::size_t dim, std::size_t batch_size, std::string model)
    : endpoint_(std::move(endpoint)), dim_(dim), batch_size_(batch_size == 0 ? 64 : batch_size),
      model_(std::move(model)) {
    if (dim_ == 0) {
        throw ConfigError("embedding dimension must be positive");
    }
}

std::vector<Vector> HttpEmbedder::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        const auto batch = texts.subspan(start, std::min(batch_size_, texts.size() - start));
        nlohmann::json body{{"texts", std::vector<std::string>(batch.begin(), batch.end())}};
        if (!model_.empty()) {
            body["model"] = model_;
        }
        const auto response = endpoint_.post(body);
        const auto it = response.find("vectors");
        if (it == response.end() || !it->is_array() || it->size() != batch.size()) {
            throw RemoteError("embeddings endpoint returned a malformed 'vectors' field");
        }
        for (const auto& row : *it) {
            if (!row.is_array() || row.size() != dim_) {
                throw RemoteError("embeddings endpoint returned a vector of dimension " +
                                  std::to_string(row.is_array() ? row.size() : 0) + ", expected " +
                                  std::to_string(dim_));
            }
            Vector v;
            v.reserve(dim_);
            for (const auto& x : row) {
                v.push_back(x.get<float>());
            }
            if (!normalize(v)) {
                throw RemoteError("embeddings endpoint returned a zero or non-finite vector");
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::string HttpEmbedder::fingerprint() const {
    return "http:" + endpoint_.config().url + ":model=" + model_ + ":dim=" + std::to_string(dim_);
}

std::map<std::string, Vector> embed_documents(EmbeddingProvider& provider, std::span<const corpus::Document> docs,
                                              std::size_t batch_size) {
    std::map<std::string, Vector> out;
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < docs.size(); start += batch_size) {
        const auto batch = docs.subspan(start, std::min(batch_size, docs.size() - start));
        std::vector<std::string> texts;
        texts.reserve(batch.size());
        for (const auto& d : batch) {
            texts.push_back(d.text);
        }
        std::vector<Vector> vectors;
        try {
            vectors = provider.embed(texts);
        } catch (const RemoteError& e) {
            throw RemoteError("embedding failed for batch starting at doc " + batch.front().doc_id + ": " + e.what());
        }
        if (vectors.size() != batch.size()) {
            throw RemoteError("embedding provider returned a short batch at doc " + batch.front().doc_id);
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (vectors[i].size() != provider.dim()) {
                throw RemoteError("embedding for doc " + batch[i].doc_id + " has the wrong dimension");
            }
            out.emplace(batch[i].doc_id, std::move(vectors[i]));
        }
    }
    return out;
}

} // namespace commitlink::retrieval
