// Integration tests that drive the installed `rtnlab` binary end to end.
// The binary path comes from the RTNLAB_BIN environment variable, set by the
// CTest registration.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "doctest.h"
#include "test_util.hpp"

namespace {

using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

std::string binary_path() {
  const char* env = std::getenv("RTNLAB_BIN");
  REQUIRE_MESSAGE(env != nullptr, "RTNLAB_BIN must point at the rtnlab binary");
  return env;
}

RunResult run(const std::string& args) {
  const std::string cmd = binary_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Shared tiny-dataset override so CLI runs stay fast.
const char* kTinySynth =
    "--set synth.n_train_videos=6 --set synth.n_val_videos=2 "
    "--set synth.segments_per_video=3 --set synth.audio_dim=3 "
    "--set synth.video_dim=3 --set synth.text_dim=3";

const char* kTinyModel =
    "--set model.embed_dim=2 --set model.lstm_hidden=3 "
    "--set model.head_hidden=3";

const char* kTinyTrain =
    "--set train.max_epochs=2 --set train.patience=2";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and argument errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("gen-data --help").code == 0);
  CHECK(run("definitely-not-a-subcommand").code == 2);
  CHECK(run("gen-data --no-such-flag").code == 2);
  CHECK(run("").code == 2);  // a subcommand is required
}

TEST_CASE("gen-data writes a splittable dataset and a manifest") {
  testutil::TempDir tmp;
  const std::string out = tmp.file("data");
  const RunResult r =
      run("gen-data --out " + out + " " + kTinySynth + " --seed 5");
  REQUIRE_MESSAGE(r.code == 0, r.output);

  const json manifest =
      json::parse(testutil::read_file(out + "/manifest.json"));
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["train_videos"] == 6);
  CHECK(manifest["val_videos"] == 2);
  CHECK(manifest["train_records"] == 18);
  CHECK(manifest.contains("config_hash"));

  // Reruns into a second directory produce byte-identical files.
  const std::string out2 = tmp.file("data2");
  REQUIRE(run("gen-data --out " + out2 + " " + kTinySynth + " --seed 5")
              .code == 0);
  CHECK(testutil::read_file(out + "/train.jsonl") ==
        testutil::read_file(out2 + "/train.jsonl"));
  CHECK(testutil::read_file(out + "/val.jsonl") ==
        testutil::read_file(out2 + "/val.jsonl"));
  CHECK(testutil::read_file(out + "/manifest.json") ==
        testutil::read_file(out2 + "/manifest.json"));

  // A different seed changes the data.
  const std::string out3 = tmp.file("data3");
  REQUIRE(run("gen-data --out " + out3 + " " + kTinySynth + " --seed 6")
              .code == 0);
  CHECK(testutil::read_file(out + "/train.jsonl") !=
        testutil::read_file(out3 + "/train.jsonl"));
}

TEST_CASE("invalid generator config exits 2 naming the field") {
  const RunResult r = run("gen-data --out /tmp/unused_rtnlab_dir "
                          "--set synth.noise_sigma=-0.5");
  CHECK(r.code == 2);
  CHECK(r.output.find("noise_sigma") != std::string::npos);

  const RunResult unknown =
      run("gen-data --out /tmp/unused_rtnlab_dir --set synth.bogus_key=1");
  CHECK(unknown.code == 2);
  CHECK(unknown.output.find("bogus_key") != std::string::npos);
}

TEST_CASE("train, eval, and compare round-trip through files") {
  testutil::TempDir tmp;
  const std::string data = tmp.file("data");
  REQUIRE(run("gen-data --out " + data + " " + kTinySynth + " --seed 1")
              .code == 0);

  const std::string ckpt = tmp.file("model.ckpt.json");
  const std::string overrides =
      std::string(" ") + kTinyModel + " " + kTinyTrain + " --seed 3";
  const RunResult tr = run("train --data " + data + " --out " + ckpt +
                           " --set model.variant=tfn" + overrides);
  REQUIRE_MESSAGE(tr.code == 0, tr.output);
  CHECK(tr.output.find("tfn") != std::string::npos);

  // Training twice yields a byte-identical checkpoint (determinism).
  const std::string ckpt2 = tmp.file("model2.ckpt.json");
  REQUIRE(run("train --data " + data + " --out " + ckpt2 +
              " --set model.variant=tfn" + overrides)
              .code == 0);
  CHECK(testutil::read_file(ckpt) == testutil::read_file(ckpt2));

  const std::string metrics = tmp.file("metrics.json");
  const RunResult ev =
      run("eval --ckpt " + ckpt + " --data " + data + " --json " + metrics);
  REQUIRE_MESSAGE(ev.code == 0, ev.output);
  const json m = json::parse(testutil::read_file(metrics));
  CHECK(m.contains("binary_acc"));
  CHECK(m.contains("sentiment_mae"));

  const std::string cmp = tmp.file("cmp.json");
  const RunResult cp = run("compare --data " + data +
                           " --variants uni_text tfn --seeds 1 --json " + cmp +
                           overrides);
  REQUIRE_MESSAGE(cp.code == 0, cp.output);
  CHECK(cp.output.find("majority") != std::string::npos);
  const json cj = json::parse(testutil::read_file(cmp));
  REQUIRE(cj["rows"].size() == 2);
  CHECK(cj.contains("majority_binary_acc"));

  // Fewer than two variants cannot be compared.
  CHECK(run("compare --data " + data + " --variants tfn --seeds 1" + overrides)
            .code == 2);
}

TEST_CASE("train and eval surface missing files with distinct exit codes") {
  testutil::TempDir tmp;
  CHECK(run("train --data " + tmp.file("nope") + " --out " +
            tmp.file("x.json"))
            .code == 3);
  const std::string data = tmp.file("data");
  REQUIRE(run("gen-data --out " + data + " " + kTinySynth).code == 0);
  CHECK(run("eval --ckpt " + tmp.file("missing.ckpt.json") + " --data " + data)
            .code == 4);
}

TEST_CASE("extract-audio phoneme mode reproduces the worked case") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.file("post.jsonl"),
                       "{\"utt\":\"u1\",\"posteriors\":"
                       "[[0.2,0.3,0.5],[0.1,0.1,0.8]]}\n");
  testutil::write_file(tmp.file("map.txt"), "0\n0\n1\n");
  const std::string out = tmp.file("feat.jsonl");
  const RunResult r = run("extract-audio --mode phoneme --posteriors " +
                          tmp.file("post.jsonl") + " --state-map " +
                          tmp.file("map.txt") + " --out " + out);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const json line = json::parse(testutil::read_file(out));
  CHECK(line["utt"] == "u1");
  const std::vector<double> want = {0.35, 0.65, 0.15, 0.15};
  REQUIRE(line["features"].size() == 4);
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(double(line["features"][i]) == doctest::Approx(want[i]).epsilon(1e-12));
  }

  // Negative posterior entries are data errors (exit 3).
  testutil::write_file(tmp.file("bad.jsonl"),
                       "{\"utt\":\"u1\",\"posteriors\":[[0.5,-0.5,1.0]]}\n");
  CHECK(run("extract-audio --mode phoneme --posteriors " + tmp.file("bad.jsonl") +
            " --state-map " + tmp.file("map.txt") + " --out " +
            tmp.file("bad_out.jsonl"))
            .code == 3);
}

TEST_CASE("extract-audio ivector mode fits and applies models") {
  testutil::TempDir tmp;
  std::string frames;
  for (int u = 0; u < 3; ++u) {
    frames += "{\"utt\":\"u" + std::to_string(u) + "\",\"frames\":[";
    for (int t = 0; t < 8; ++t) {
      if (t) frames += ",";
      const double base = (u % 2 == 0) ? -1.0 : 1.0;
      frames += "[" + std::to_string(base + 0.1 * t) + "," +
                std::to_string(base - 0.05 * t) + "]";
    }
    frames += "]}\n";
  }
  testutil::write_file(tmp.file("frames.jsonl"), frames);

  const std::string out = tmp.file("ivec.jsonl");
  const RunResult r = run("extract-audio --mode ivector --frames " +
                          tmp.file("frames.jsonl") +
                          " --fit-ubm 2 --fit-tv 2 --em-iters 3 --ubm " +
                          tmp.file("ubm.json") + " --tv " + tmp.file("tv.json") +
                          " --out " + out + " --seed 4");
  REQUIRE_MESSAGE(r.code == 0, r.output);

  std::istringstream lines(testutil::read_file(out));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    CHECK(j["features"].size() == 2);  // the fitted rank
    ++count;
  }
  CHECK(count == 3);

  // The saved models can be reused without refitting, reproducibly.
  const std::string out2 = tmp.file("ivec2.jsonl");
  REQUIRE(run("extract-audio --mode ivector --frames " + tmp.file("frames.jsonl") +
              " --ubm " + tmp.file("ubm.json") + " --tv " + tmp.file("tv.json") +
              " --out " + out2)
              .code == 0);
  CHECK(testutil::read_file(out) == testutil::read_file(out2));

  // Referencing a missing model file is a config error.
  CHECK(run("extract-audio --mode ivector --frames " + tmp.file("frames.jsonl") +
            " --ubm " + tmp.file("no_ubm.json") + " --tv " + tmp.file("tv.json") +
            " --out " + tmp.file("x.jsonl"))
            .code == 2);
}

TEST_CASE("extract-text composes the configured features") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.file("wv.tsv"), "good\t1,0\nmovie\t0,1\n");
  testutil::write_file(tmp.file("val.tsv"), "good\t1.9\n");
  testutil::write_file(
      tmp.file("tr.jsonl"),
      "{\"utt\":\"s1\",\"tokens\":[\"good\",\"movie\"]}\n"
      "{\"utt\":\"s2\",\"tokens\":[\"movie\"]}\n");

  const std::string out = tmp.file("text.jsonl");
  const RunResult r = run("extract-text --transcripts " + tmp.file("tr.jsonl") +
                          " --word-vectors " + tmp.file("wv.tsv") +
                          " --valence " + tmp.file("val.tsv") +
                          " --use-rule --out " + out);
  REQUIRE_MESSAGE(r.code == 0, r.output);

  std::istringstream lines(testutil::read_file(out));
  std::string line;
  std::vector<json> rows;
  while (std::getline(lines, line)) rows.push_back(json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["utt"] == "s1");
  CHECK(rows[1]["utt"] == "s2");
  REQUIRE(rows[0]["features"].size() == 3);  // 2 embedding dims + rule score
  CHECK(double(rows[0]["features"][0]) == doctest::Approx(0.5));
  CHECK(double(rows[0]["features"][2]) > 0.0);   // "good" scores positive
  CHECK(double(rows[1]["features"][2]) == 0.0);  // no valence hit

  // --use-rule without a valence file cannot be satisfied.
  CHECK(run("extract-text --transcripts " + tmp.file("tr.jsonl") +
            " --word-vectors " + tmp.file("wv.tsv") + " --use-rule --out " +
            tmp.file("x.jsonl"))
            .code == 2);

  // A malformed transcript line is a data error with the line number.
  testutil::write_file(tmp.file("bad.jsonl"), "{\"utt\":\"s1\"}\n");
  const RunResult bad =
      run("extract-text --transcripts " + tmp.file("bad.jsonl") +
          " --word-vectors " + tmp.file("wv.tsv") + " --out " +
          tmp.file("y.jsonl"));
  CHECK(bad.code == 3);
}

TEST_CASE("gradcheck exits 0 normally and 1 with an injected fault") {
  const RunResult ok = run("gradcheck");
  REQUIRE_MESSAGE(ok.code == 0, ok.output);
  CHECK(ok.output.find("PASS") != std::string::npos);
  CHECK(ok.output.find("FAIL") == std::string::npos);

  const RunResult bad = run("gradcheck --inject-fault");
  CHECK(bad.code == 1);
  CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("config files merge with dotted overrides") {
  testutil::TempDir tmp;
  const std::string cfg = tmp.file("cfg.json");
  testutil::write_file(cfg,
                       "{\"synth\":{\"n_train_videos\":4,\"n_val_videos\":2,"
                       "\"segments_per_video\":2,\"audio_dim\":2,"
                       "\"video_dim\":2,\"text_dim\":2,\"seed\":9}}");
  const std::string out = tmp.file("data");
  REQUIRE(run("--config " + cfg + " gen-data --out " + out).code == 0);
  const json manifest = json::parse(testutil::read_file(out + "/manifest.json"));
  CHECK(manifest["config"]["n_train_videos"] == 4);
  CHECK(manifest["seed"] == 9);

  // --set beats the file; --seed beats both.
  const std::string out2 = tmp.file("data2");
  REQUIRE(run("--config " + cfg + " gen-data --out " + out2 +
              " --set synth.n_train_videos=5 --seed 11")
              .code == 0);
  const json m2 = json::parse(testutil::read_file(out2 + "/manifest.json"));
  CHECK(m2["config"]["n_train_videos"] == 5);
  CHECK(m2["seed"] == 11);

  // Unknown top-level sections are config errors.
  const std::string bad = tmp.file("bad.json");
  testutil::write_file(bad, "{\"mystery\":{}}");
  const RunResult r = run("--config " + bad + " gen-data --out " + tmp.file("d"));
  CHECK(r.code == 2);
  CHECK(r.output.find("mystery") != std::string::npos);
}

}  // TEST_SUITE
