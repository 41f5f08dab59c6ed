#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "silico/embedding.hpp"
#include "silico/text.hpp"
#include "support/test_support.hpp"

using namespace silico;
using nlohmann::json;

namespace {

RefinedCorpus corpus_of(const std::vector<std::string>& descs) {
  RefinedCorpus c;
  for (std::size_t i = 0; i < descs.size(); ++i) {
    SubmoltRecord r;
    r.id = "e" + std::to_string(i);
    r.name = r.id;
    r.description = descs[i];
    c.records.push_back(r);
  }
  c.input_count = descs.size();
  return c;
}

std::set<std::string> trigrams(const std::string& s) {
  std::set<std::string> out;
  const auto cps = text::codepoints(s);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) out.insert(cps[i] + cps[i + 1] + cps[i + 2]);
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// Answers {"data": [{"embedding": [...]}, ...]} with a vector derived from each
// input's length, so results are checkable.
class MockEmbedServer {
 public:
  explicit MockEmbedServer(std::size_t dim, int fail_first = 0) : dim_(dim), fail_first_(fail_first) {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      if (fail_first_-- > 0) {
        res.status = 503;
        return;
      }
      const auto body = json::parse(req.body);
      json data = json::array();
      for (const auto& t : body.at("input")) {
        std::vector<float> v(dim_, 0.0f);
        v[t.get<std::string>().size() % dim_] = 1.0f;
        data.push_back({{"embedding", v}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEmbedServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/embeddings"; }
  int calls() const { return calls_; }

 private:
  std::size_t dim_;
  std::atomic<int> fail_first_;
  std::atomic<int> calls_{0};
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(Cosine, Basics) {
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 2, 2}, std::vector<double>{2, 4, 4}), 1.0, 1e-15);
  EXPECT_THROW(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), Error);
  EXPECT_THROW(cosine_similarity(std::vector<double>{1}, std::vector<double>{1, 0}), Error);
}

TEST(Offline, DeterministicAndUnitNorm) {
  const auto a = offline_embed("whisky tasting club", 3072, 9);
  const auto b = offline_embed("whisky tasting club", 3072, 9);
  ASSERT_EQ(a.size(), 3072u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(cosine_similarity(a, b), 1.0);
  double sq = 0;
  for (double v : a) sq += v * v;
  EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-9);
  EXPECT_NE(offline_embed("whisky tasting club", 3072, 10), a);
}

TEST(Offline, SharedTrigramsMeanHigherSimilarity) {
  const std::string first = "whisky tasting club", second = "whisky tasting society", third = "quantum risk markets";
  ASSERT_GT(jaccard(trigrams(first), trigrams(second)), jaccard(trigrams(first), trigrams(third)));
  const auto e1 = offline_embed(first, 3072, 1), e2 = offline_embed(second, 3072, 1), e3 = offline_embed(third, 3072, 1);
  EXPECT_GT(cosine_similarity(e1, e2), cosine_similarity(e1, e3));
}

TEST(Offline, RejectsEmptyText) {
  EXPECT_THROW(offline_embed("   ", 64, 1), Error);
  EXPECT_THROW(offline_embed("x", 1, 1), Error);
}

TEST(EmbedCorpus, PaperShapeMatrix) {
  std::vector<std::string> descs;
  for (int i = 0; i < 4162; ++i) descs.push_back("community number " + std::to_string(i) + " for agents");
  ProviderConfig p;
  p.dim = 3072;
  p.seed = 3;
  EmbedStats stats;
  const auto m = embed_corpus(corpus_of(descs), p, &stats);
  EXPECT_EQ(m.rows(), 4162u);
  EXPECT_EQ(m.dim, 3072u);
  EXPECT_EQ(m.data.size(), 4162u * 3072u);
  EXPECT_EQ(stats.computed, 4162u);
}

TEST(EmbedCorpus, IdenticalDescriptionsGiveIdenticalRows) {
  ProviderConfig p;
  p.dim = 64;
  const auto m = embed_corpus(corpus_of({"same text", "other text", "same text"}), p);
  ASSERT_EQ(m.rows(), 3u);
  EXPECT_TRUE(std::equal(m.row(0).begin(), m.row(0).end(), m.row(2).begin()));
}

TEST(EmbedCorpus, CacheIsReused) {
  testsupport::TempDir dir;
  ProviderConfig p;
  p.dim = 32;
  p.cache_dir = dir.path();
  EmbedStats first, second;
  const auto a = embed_corpus(corpus_of({"alpha beta", "gamma delta"}), p, &first);
  const auto b = embed_corpus(corpus_of({"alpha beta", "gamma delta"}), p, &second);
  EXPECT_EQ(first.computed, 2u);
  EXPECT_EQ(second.cache_hits, 2u);
  EXPECT_EQ(second.computed, 0u);
  EXPECT_EQ(a, b);
}

TEST(EmbedCorpus, CacheKeyDependsOnProviderTag) {
  EXPECT_NE(EmbeddingCache::key("offline:a", "x"), EmbeddingCache::key("offline:b", "x"));
  EXPECT_EQ(EmbeddingCache::key("offline:a", "x"), EmbeddingCache::key("offline:a", "x"));
}

TEST(EmbedCorpus, EmptyCorpusRejected) {
  EXPECT_THROW(embed_corpus(corpus_of({}), ProviderConfig{}), Error);
}

TEST(Matrix, SaveLoadRoundTrip) {
  testsupport::TempDir dir;
  ProviderConfig p;
  p.dim = 16;
  const auto m = embed_corpus(corpus_of({"one two", "three four", "five six"}), p);
  save_matrix(m, dir / "m.bin");
  EXPECT_EQ(load_matrix(dir / "m.bin"), m);
}

TEST(Matrix, ValidateCatchesBadShapes) {
  EmbeddingMatrix m;
  m.dim = 2;
  m.record_ids = {"a", "a"};
  m.data = {1, 2, 3, 4};
  EXPECT_THROW(m.validate(), Error);
  m.record_ids = {"a", "b"};
  m.data = {1, 2, 3, NAN};
  EXPECT_THROW(m.validate(), Error);
  m.data = {1, 2, 3};
  EXPECT_THROW(m.validate(), Error);
}

TEST(Remote, BatchesAreSentAndAssembled) {
  MockEmbedServer server(8);
  ProviderConfig p;
  p.kind = ProviderKind::Remote;
  p.endpoint = server.endpoint();
  p.dim = 8;
  p.batch_size = 2;
  p.max_in_flight = 2;
  EmbedStats stats;
  const auto m = embed_corpus(corpus_of({"a b", "abc d", "abcde f", "x y z w", "q"}), p, &stats);
  EXPECT_EQ(m.rows(), 5u);
  EXPECT_EQ(stats.remote_calls, 3u);
  EXPECT_EQ(server.calls(), 3);
  EXPECT_EQ(m.row(1)[5 % 8], 1.0f);  // "abc d" has length 5
}

TEST(Remote, RetriesTransientFailures) {
  MockEmbedServer server(4, 2);
  ProviderConfig p;
  p.kind = ProviderKind::Remote;
  p.endpoint = server.endpoint();
  p.dim = 4;
  p.retry = RetryPolicy{3, std::chrono::milliseconds(1), std::chrono::milliseconds(2)};
  const auto vecs = remote_embed_batch(p, {"abc"});
  ASSERT_EQ(vecs.size(), 1u);
  EXPECT_EQ(server.calls(), 3);
}

TEST(Remote, DimensionMismatchIsValidationError) {
  MockEmbedServer server(4);
  ProviderConfig p;
  p.kind = ProviderKind::Remote;
  p.endpoint = server.endpoint();
  p.dim = 8;
  try {
    remote_embed_batch(p, {"abc"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
}

TEST(Remote, GivesUpAfterRetries) {
  MockEmbedServer server(4, 100);
  ProviderConfig p;
  p.kind = ProviderKind::Remote;
  p.endpoint = server.endpoint();
  p.dim = 4;
  p.retry = RetryPolicy{2, std::chrono::milliseconds(1), std::chrono::milliseconds(1)};
  try {
    remote_embed_batch(p, {"abc"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Provider);
  }
  EXPECT_EQ(server.calls(), 3);
}
