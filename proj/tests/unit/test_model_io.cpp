#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "vrcp/model_io.hpp"

namespace vrcp {
namespace {

const std::filesystem::path kCorpus = VRCP_MODEL_CORPUS_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(ModelIo, MinimalValidFile) {
  const ModelFile m = read_model_file(kCorpus / "valid_minimal.json");
  EXPECT_EQ(m.network.size(), 1u);
  EXPECT_EQ(m.network.input_dim(), 2u);
  EXPECT_EQ(m.task, ModelTask::classifier());
  EXPECT_EQ(forward(m.network, Vector{3, 4}), (Vector{3, 4}));
}

TEST(ModelIo, DimensionErrorNamesSecondLayer) {
  const std::string doc =
      R"({"version":1,"input_dim":2,"task":{"kind":"classifier"},"layers":[)"
      R"({"kind":"affine","w":[[1,0],[0,1]],"b":[0,0]},{"kind":"affine","w":[[1,0,0],[0,1,0]],"b":[0,0]}]})";
  try {
    load_model(doc);
    FAIL() << "expected a dimension error";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ModelErrorKind::dimension);
    ASSERT_TRUE(e.layer().has_value());
    EXPECT_EQ(*e.layer(), 1u);
  }
}

TEST(ModelIo, MalformedCorpusRejectedWithDocumentedKind) {
  const nlohmann::json manifest = nlohmann::json::parse(slurp(kCorpus / "manifest.json"));
  ASSERT_GE(manifest.size(), 10u);
  for (const auto& entry : manifest) {
    const std::string file = entry.at("file");
    SCOPED_TRACE(file);
    try {
      read_model_file(kCorpus / file);
      ADD_FAILURE() << "accepted malformed model";
    } catch (const ModelError& e) {
      EXPECT_STREQ(to_string(e.kind()), entry.at("kind").get<std::string>().c_str()) << e.what();
      if (entry.contains("layer")) {
        ASSERT_TRUE(e.layer().has_value()) << e.what();
        EXPECT_EQ(*e.layer(), entry.at("layer").get<std::size_t>());
      } else {
        EXPECT_FALSE(e.layer().has_value()) << e.what();
      }
    }
  }
}

TEST(ModelIo, RoundTripRandomNetworks) {
  oracle::Engine rng(123);
  for (int t = 0; t < 50; ++t) {
    const Network net = oracle::random_network(rng, {3, 5, 4, 2}, t % 2 ? LayerKind::relu : LayerKind::leaky_relu,
                                               0.1 + 0.01 * t, t % 3 == 0);
    const std::string text = save_model(net);
    const ModelFile back = load_model(text);
    EXPECT_EQ(back.network, net);  // bit-exact weights
    EXPECT_EQ(save_model(back), text);
  }
}

TEST(ModelIo, SaveIsCanonicalAndDeterministic) {
  oracle::Engine rng(1);
  const Network net = oracle::random_network(rng, {2, 3, 1});
  const std::string a = save_model(net, ModelTask::quantile(0.05));
  const std::string b = save_model(net, ModelTask::quantile(0.05));
  EXPECT_EQ(a, b);
  // Sorted keys: "input_dim" < "layers" < "task" < "version".
  EXPECT_LT(a.find("\"input_dim\""), a.find("\"layers\""));
  EXPECT_LT(a.find("\"layers\""), a.find("\"task\""));
  EXPECT_LT(a.find("\"task\""), a.find("\"version\""));
  const ModelFile back = load_model(a);
  EXPECT_EQ(back.task, ModelTask::quantile(0.05));
}

TEST(ModelIo, RoundTripModuloWhitespace) {
  const std::string spaced =
      "{\n  \"version\": 1,\n  \"input_dim\": 1,\n  \"task\": {\"kind\": \"quantile\", \"tau\": 0.95},\n"
      "  \"layers\": [ {\"kind\": \"affine\", \"w\": [[0.1]], \"b\": [2.5]} ]\n}\n";
  const ModelFile m = load_model(spaced);
  const std::string canon = save_model(m);
  std::string stripped;
  for (char c : spaced)
    if (c != ' ' && c != '\n') stripped += c;
  EXPECT_EQ(load_model(canon).network, m.network);
  EXPECT_EQ(save_model(load_model(stripped)), canon);
}

TEST(ModelIo, FileRoundTrip) {
  oracle::Engine rng(4);
  const Network net = oracle::random_network(rng, {2, 4, 3}, LayerKind::relu, 0.1, true);
  const auto path = std::filesystem::temp_directory_path() / "vrcp_model_io_roundtrip.json";
  write_model_file(path, {net, ModelTask::classifier()});
  EXPECT_EQ(read_model_file(path).network, net);
  std::filesystem::remove(path);
  EXPECT_THROW(read_model_file(path), Error);
}

}  // namespace
}  // namespace vrcp
