#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(SEEDFORGE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    seedforge::test::TempDir dir;
    std::string conf;
    Workspace() {
        conf = (dir.path() / "small.conf").string();
        std::ofstream(conf) << "seed = 42\ndataset.size = 50\ntopics.cultural = 8\ntopics.general = 6\n";
    }
    std::string at(const std::string& name) const { return (dir.path() / name).string(); }
};

}  // namespace

TEST(Cli, StagewiseSubcommands) {
    Workspace w;
    EXPECT_EQ(run("topics --config " + w.conf + " --general 3 --cultural 2 --out " + w.at("t.jsonl")), 0);
    EXPECT_EQ(run("contexts --config " + w.conf + " --topics " + w.at("t.jsonl") + " --out " + w.at("c.jsonl")), 0);
    EXPECT_EQ(run("generate --config " + w.conf + " --contexts " + w.at("c.jsonl") + " --out " + w.at("r.jsonl")), 0);
    EXPECT_EQ(run("dedup --config " + w.conf + " --in " + w.at("r.jsonl") + " --threshold 0.95 --out " +
                  w.at("k.jsonl") + " --removals " + w.at("rm.jsonl")),
              0);
    EXPECT_FALSE(slurp(w.at("k.jsonl")).empty());
}

TEST(Cli, RunIsRepeatableAndAblateWritesManifest) {
    Workspace w;
    ASSERT_EQ(run("run --config " + w.conf + " --workdir " + w.at("a")), 0);
    ASSERT_EQ(run("run --config " + w.conf + " --workdir " + w.at("b")), 0);
    EXPECT_EQ(slurp(w.at("a/dataset.manifest.json")), slurp(w.at("b/dataset.manifest.json")));
    EXPECT_EQ(run("ablate --config " + w.conf + " --variant culture --set ablation.sample=10 --source " +
                  w.at("a/dataset.jsonl") + " --out " + w.at("culture.jsonl")),
              0);
    EXPECT_NE(slurp(w.at("culture.manifest.json")).find("\"record_count\": 50"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    Workspace w;
    EXPECT_EQ(run("run --config " + w.conf + " --set dedup.threshold=1.5 --workdir " + w.at("x")), 2);
    EXPECT_EQ(run("run --config " + w.at("missing.conf") + " --workdir " + w.at("x")), 2);
    EXPECT_EQ(run("run --config " + w.conf + " --set no.such.key=1 --workdir " + w.at("x")), 2);
    EXPECT_EQ(run("run --workdir"), 2);
    EXPECT_EQ(run("ablate --config " + w.conf +
                  " --variant diversity --set ablation.diversity_topics=2 --set ablation.max_extension_rounds=0 --out " +
                  w.at("d.jsonl")),
              4);
    EXPECT_EQ(run("run --config " + w.conf +
                  " --set provider.generation.kind=openai --set provider.generation.base_url=http://127.0.0.1:9/v1"
                  " --set provider.generation.model=m --set budget.retry_limit=0 --workdir " + w.at("p")),
              3);
}
