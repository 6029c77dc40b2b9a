#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cmnet/data/corpus.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using cmnet::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cmnet");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;

  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("cmnet-cli-" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  // Toy configuration with absolute paths, small enough to train in seconds.
  json toy(std::size_t epochs = 2) const {
    const auto toy_dir = testing::data_dir() / "toy";
    return {{"train", (toy_dir / "train.txt").string()},
            {"valid", (toy_dir / "valid.txt").string()},
            {"embeddings", (toy_dir / "embeddings.txt").string()},
            {"checkpoint-dir", (dir / "run").string()},
            {"word-dim", 50},
            {"char-dim", 8},
            {"char-filters", 10},
            {"hidden-size", 16},
            {"blocks", 2},
            {"dropout", 0.0},
            {"epochs", epochs},
            {"seed", 3}};
  }

  fs::path write(const json& j, const std::string& name = "config.json") const {
    const auto p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }
};

}  // namespace

TEST_SUITE("train command") {
  TEST_CASE("writes a checkpoint and parseable metrics") {
    Scratch s("train");
    auto r = cli({"train", s.write(s.toy()).string()});
    CHECK(r.code == 0);
    CAPTURE(r.err);
    REQUIRE(fs::exists(s.dir / "run" / "model.ckpt"));
    auto metrics = json::parse(slurp(s.dir / "run" / "metrics.json"));
    CHECK(metrics["epochs"].size() == 2);
    CHECK(metrics["step-losses"].size() == 60);
    CHECK(metrics.contains("best-epoch"));
  }

  TEST_CASE("same seed, identical files") {
    Scratch s("determinism");
    auto config = s.toy();
    config["dropout"] = 0.3;
    const auto path = s.write(config);
    REQUIRE(cli({"train", path.string(), "--checkpoint-dir", (s.dir / "a").string()}).code == 0);
    REQUIRE(cli({"train", path.string(), "--checkpoint-dir", (s.dir / "b").string()}).code == 0);
    CHECK(slurp(s.dir / "a" / "metrics.json") == slurp(s.dir / "b" / "metrics.json"));
    CHECK(slurp(s.dir / "a" / "model.ckpt") == slurp(s.dir / "b" / "model.ckpt"));
    REQUIRE(cli({"train", path.string(), "--seed", "4", "--checkpoint-dir", (s.dir / "c").string()}).code == 0);
    CHECK(slurp(s.dir / "a" / "metrics.json") != slurp(s.dir / "c" / "metrics.json"));
  }

  TEST_CASE("missing embeddings file names the field") {
    Scratch s("missing");
    auto config = s.toy();
    config["embeddings"] = (s.dir / "nope.txt").string();
    auto r = cli({"train", s.write(config).string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("embeddings") != std::string::npos);
    CHECK_FALSE(fs::exists(s.dir / "run"));
  }

  TEST_CASE("configuration errors exit 2") {
    Scratch s("config");
    auto unknown = s.toy();
    unknown["learning-rate"] = 0.1;
    auto r = cli({"train", s.write(unknown).string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("learning-rate") != std::string::npos);

    auto wrong_type = s.toy();
    wrong_type["blocks"] = "three";
    r = cli({"train", s.write(wrong_type).string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("blocks") != std::string::npos);

    CHECK(cli({"train", s.write(s.toy()).string(), "--lambda", "1.5"}).code == 2);
    CHECK(cli({"train", (s.dir / "absent.json").string()}).code == 2);
    CHECK(cli({"train"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);

    std::ofstream(s.dir / "broken.json") << "{ \"train\": ";
    CHECK(cli({"train", (s.dir / "broken.json").string()}).code == 2);
  }

  TEST_CASE("seed from the environment") {
    Scratch s("env");
    const auto path = s.write(s.toy(1));
    REQUIRE(cli({"train", path.string(), "--checkpoint-dir", (s.dir / "a").string()}).code == 0);
    ::setenv("CMNET_SEED", "11", 1);
    const int code = cli({"train", path.string(), "--checkpoint-dir", (s.dir / "b").string()}).code;
    ::unsetenv("CMNET_SEED");
    REQUIRE(code == 0);
    CHECK(slurp(s.dir / "a" / "metrics.json") != slurp(s.dir / "b" / "metrics.json"));
    CHECK(slurp(s.dir / "b" / "model.ckpt").find("meta seed 11") != std::string::npos);
  }
}

TEST_SUITE("eval and predict") {
  TEST_CASE("overfit model scores 100/100 and predictions roundtrip") {
    Scratch s("overfit");
    auto config = s.toy(300);
    config["hidden-size"] = 32;
    config["blocks"] = 3;
    config["char-dim"] = 16;
    config["char-filters"] = 30;
    config["stop-when-fitted"] = true;
    config.erase("valid");
    REQUIRE(cli({"train", s.write(config).string()}).code == 0);
    const auto ckpt = (s.dir / "run" / "model.ckpt").string();
    const auto train_file = (testing::data_dir() / "toy" / "train.txt").string();

    auto r = cli({"eval", "--checkpoint", ckpt, "--corpus", train_file});
    CHECK(r.code == 0);
    CHECK(r.out.find("FB1: 100.00") != std::string::npos);
    CHECK(r.out.find("intent accuracy: 100.00%") != std::string::npos);

    const auto predicted = s.dir / "pred.txt";
    REQUIRE(cli({"predict", "--checkpoint", ckpt, "--corpus", train_file, "--output", predicted.string()}).code == 0);
    auto gold = cmnet::data::read_corpus_file(train_file, cmnet::data::TagScheme::kBioes);
    auto pred = cmnet::data::read_corpus_file(predicted, cmnet::data::TagScheme::kBioes);
    CHECK(pred == gold);
    r = cli({"eval", "--predicted", predicted.string(), "--corpus", train_file});
    CHECK(r.code == 0);
    CHECK(r.out.find("FB1: 100.00") != std::string::npos);
  }

  TEST_CASE("corrupted checkpoint exits 4") {
    Scratch s("corrupt");
    REQUIRE(cli({"train", s.write(s.toy(1)).string()}).code == 0);
    const auto ckpt = s.dir / "run" / "model.ckpt";
    auto text = slurp(ckpt);
    text.resize(text.size() * 2 / 3);
    std::ofstream(s.dir / "bad.ckpt") << text;
    const auto train_file = (testing::data_dir() / "toy" / "train.txt").string();
    CHECK(cli({"eval", "--checkpoint", (s.dir / "bad.ckpt").string(), "--corpus", train_file}).code == 4);
    CHECK(cli({"predict", "--checkpoint", (s.dir / "bad.ckpt").string(), "--corpus", train_file}).code == 4);
    CHECK(cli({"eval", "--checkpoint", (s.dir / "none.ckpt").string(), "--corpus", train_file}).code == 4);
  }

  TEST_CASE("vocabulary mismatch exits 4") {
    Scratch s("vocab");
    const auto config = s.write(s.toy(1));
    REQUIRE(cli({"train", config.string()}).code == 0);
    const auto ckpt = (s.dir / "run" / "model.ckpt").string();
    const auto train_file = (testing::data_dir() / "toy" / "train.txt").string();
    CHECK(cli({"eval", "--checkpoint", ckpt, "--corpus", train_file, "--config", config.string()}).code == 0);
    auto other = s.toy(1);
    other["train"] = (testing::data_dir() / "toy" / "valid.txt").string();
    CHECK(cli({"eval", "--checkpoint", ckpt, "--corpus", train_file, "--config", s.write(other, "o.json").string()})
              .code == 4);
  }
}

TEST_SUITE("ablate command") {
  TEST_CASE("removals show up in the report") {
    Scratch s("ablate");
    auto r = cli({"ablate", s.write(s.toy(1)).string(), "--ablate", "no-slot-memory"});
    CHECK(r.code == 0);
    CHECK(r.out.find("removed memory.slot") != std::string::npos);
    CHECK(r.out.find("removed block.0.att.slot.joint") != std::string::npos);
    CHECK(r.out.find("no-slot-memory") != std::string::npos);
  }

  TEST_CASE("contradictory or unknown flags exit 2") {
    Scratch s("contradict");
    const auto path = s.write(s.toy(1)).string();
    CHECK(cli({"ablate", path, "--ablate", "no-slot-memory,no-int2slot"}).code == 2);
    CHECK(cli({"ablate", path, "--ablate", "no-intent-memory,no-slot2int"}).code == 2);
    CHECK(cli({"ablate", path, "--ablate", "no-such-thing"}).code == 2);
  }
}

TEST_SUITE("gradcheck command") {
  TEST_CASE("reports both error measures per group") {
    Scratch s("gradcheck");
    auto config = s.toy();
    config["hidden-size"] = 4;
    config["blocks"] = 1;
    config["char-filters"] = 4;
    config["char-dim"] = 3;
    auto r = cli({"gradcheck", s.write(config).string()});
    CAPTURE(r.out);
    CHECK(r.out.find("max relative error") != std::string::npos);
    CHECK(r.out.find("block.0.gate.i") != std::string::npos);
    CHECK(r.out.find("max tensor relative error") != std::string::npos);
    CHECK((r.code == 0 || r.code == 5));
  }

  TEST_CASE("broken gate gradient exits 5 naming the group") {
    Scratch s("gradcheck-broken");
    auto config = s.toy();
    config["hidden-size"] = 4;
    config["blocks"] = 1;
    auto r = cli({"gradcheck", s.write(config).string(), "--break-gate-gradient"});
    CHECK(r.code == 5);
    CHECK(r.out.find("FAILED: group block.0.gate.i") != std::string::npos);
  }

  TEST_CASE("lambda 1 zeroes the CRF groups") {
    Scratch s("gradcheck-lambda");
    auto config = s.toy();
    config["hidden-size"] = 4;
    config["blocks"] = 1;
    config["lambda"] = 1.0;
    auto r = cli({"gradcheck", s.write(config).string()});
    std::istringstream lines(r.out);
    std::string line;
    int crf_rows = 0;
    while (std::getline(lines, line)) {
      if (line.rfind("crf", 0) != 0) continue;
      ++crf_rows;
      std::istringstream fields(line);
      std::string name;
      double rel, tensor_rel, diff, analytic, numeric;
      fields >> name >> rel >> tensor_rel >> diff >> analytic >> numeric;
      CAPTURE(line);
      CHECK(analytic == 0.0);
      CHECK(numeric == 0.0);
    }
    CHECK(crf_rows == 2);
  }
}

TEST_SUITE("stats command") {
  TEST_CASE("toy counts") {
    const auto toy = testing::data_dir() / "toy";
    auto r = cli({"stats", (toy / "train.txt").string(), (toy / "valid.txt").string()});
    REQUIRE(r.code == 0);
    auto train = cmnet::data::read_corpus_file(toy / "train.txt", cmnet::data::TagScheme::kBioes);
    auto valid = cmnet::data::read_corpus_file(toy / "valid.txt", cmnet::data::TagScheme::kBioes);
    std::size_t tokens = 0;
    for (const auto& u : train) tokens += u.size();
    for (const auto& u : valid) tokens += u.size();
    char avg[32];
    std::snprintf(avg, sizeof avg, "%.2f", double(tokens) / double(train.size() + valid.size()));
    CHECK(r.out.find(std::string("average length   ") + avg) != std::string::npos);
    CHECK(r.out.find("intents          3") != std::string::npos);
    CHECK(r.out.find("slots            6") != std::string::npos);
    CHECK(r.out.find("split sizes      30 / 9") != std::string::npos);
  }

  TEST_CASE("empty file is a parse error") {
    Scratch s("stats");
    std::ofstream(s.dir / "empty.txt").close();
    CHECK(cli({"stats", (s.dir / "empty.txt").string()}).code == 2);
  }
}
