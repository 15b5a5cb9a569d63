#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <thread>

#include "featstream/bitstream.hpp"
#include "featstream/container.hpp"
#include "test_helpers.hpp"

using namespace featstream;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(FEATSTREAM_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

class Cli : public ::testing::Test {
protected:
    fstest::TempDir dir;
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

TEST_F(Cli, GenCompressDecompressRoundTrip) {
    ASSERT_EQ(cli("gen --profile vgg16/conv5 --nonzero 0.068 --seed 7 " + path("a.ftc")).code, 0);
    auto t = load_container(dir / "a.ftc");
    EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{14, 14, 512}));
    EXPECT_EQ(t.meta.network, "vgg16");
    EXPECT_EQ(compute_stats(t).nonzero_count, 6824u);

    for (const char* codec : {"gzip", "bzip2", "zeromask+lzma"}) {
        ASSERT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf") + " --codec " + codec).code, 0) << codec;
        ASSERT_EQ(cli("decompress " + path("a.fdf") + " " + path("b.ftc")).code, 0);
        EXPECT_EQ(read_file(dir / "a.ftc"), read_file(dir / "b.ftc")) << codec;
    }
}

TEST_F(Cli, OutputsMatchLibraryCalls) {
    ASSERT_EQ(cli("gen --shape 9x9x32 --nonzero 0.3 --seed 11 --network vgg16 --layer conv5 " + path("a.ftc")).code, 0);
    auto t = generate_synthetic(std::vector<std::uint32_t>{9, 9, 32}, 0.3, ReluGaussian{1.0}, 11);
    t.meta.network = "vgg16";
    t.meta.layer = "conv5";
    EXPECT_EQ(read_file(dir / "a.ftc"), write_container(t));

    ASSERT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf") + " --codec zeromask+zlib --level 3").code, 0);
    EXPECT_EQ(read_file(dir / "a.fdf"), encode_feature(t, CodecId::zeromask(Backend::Zlib), {3}).serialize());

    ASSERT_EQ(cli("compress " + path("a.ftc") + " " + path("q.fdf") + " --quant-bits 5").code, 0);
    EXPECT_EQ(read_file(dir / "q.fdf"),
              encode_feature(t, CodecId::gzip(), {}, Mode::Quantized, auto_range(t, 5)).serialize());
}

TEST_F(Cli, GenShapeOptions) {
    ASSERT_EQ(cli("gen --shape 1000 --nonzero 1 --dist uniform --lo -1 --hi 1 --seed 3 --layer fc3 " + path("v.ftc"))
                  .code,
              0);
    auto v = load_container(dir / "v.ftc");
    EXPECT_EQ(v.meta.category, Category::Fc);
    EXPECT_EQ(v.meta.layer, "fc3");
    EXPECT_EQ(cli("gen --shape 4x4x4 --nonzero 0.5 --seed 1 --category pool " + path("p.ftc")).code, 0);
    EXPECT_EQ(load_container(dir / "p.ftc").meta.category, Category::Pool);
}

TEST_F(Cli, QuantizedCompress) {
    ASSERT_EQ(cli("gen --shape 8x8x8 --nonzero 0.5 --seed 2 " + path("a.ftc")).code, 0);
    ASSERT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf") + " --quant-bits 6").code, 0);
    auto r = cli("inspect " + path("a.fdf"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("mode: quantized"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("quantBits: 6"), std::string::npos) << r.out;
    EXPECT_EQ(cli("decompress " + path("a.fdf") + " " + path("b.ftc")).code, 0);
}

TEST_F(Cli, Inspect) {
    ASSERT_EQ(cli("gen --shape 14x14x512 --nonzero 0.1 --seed 1 --network vgg16 --layer conv5 " + path("a.ftc")).code, 0);
    auto c = cli("inspect " + path("a.ftc"));
    EXPECT_EQ(c.code, 0);
    EXPECT_NE(c.out.find("format: FTC1"), std::string::npos);
    EXPECT_NE(c.out.find("dims: 14x14x512"), std::string::npos);
    EXPECT_NE(c.out.find("volumeBytes: 401408"), std::string::npos);

    ASSERT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf") + " --codec zlib --level 9").code, 0);
    auto b = cli("inspect " + path("a.fdf"));
    EXPECT_NE(b.out.find("format: FDF1"), std::string::npos);
    EXPECT_NE(b.out.find("codec: zlib"), std::string::npos);
    EXPECT_NE(b.out.find("originalLen: 401408"), std::string::npos);
    EXPECT_NE(b.out.find("layer: conv5"), std::string::npos);
}

TEST_F(Cli, Bench) {
    for (int i = 0; i < 3; ++i)
        ASSERT_EQ(cli("gen --profile vgg16/pool5 --nonzero 0.2 --seed " + std::to_string(i) + " " +
                      path("s" + std::to_string(i) + ".ftc"))
                      .code,
                  0);
    auto csv = cli("bench " + dir.path.string() + " --codecs gzip,zeromask --repeat 1");
    ASSERT_EQ(csv.code, 0);
    EXPECT_EQ(csv.out.rfind("feat_type,feat_shape,data_volume,", 0), 0u);
    EXPECT_NE(csv.out.find("pool5,7x7x512,100352,"), std::string::npos) << csv.out;
    EXPECT_NE(csv.out.find(",zeromask,"), std::string::npos);

    ASSERT_EQ(cli("bench " + dir.path.string() + " --format md --repeat 1 " + path("r.md")).code, 0);
    auto md = read_file(dir / "r.md");
    std::string text(md.begin(), md.end());
    EXPECT_NE(text.find("### vgg16"), std::string::npos);
    EXPECT_NE(text.find("| pool5 | 7x7x512 | 98K |"), std::string::npos) << text;
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(cli("").code, 1);
    EXPECT_EQ(cli("frobnicate").code, 1);
    EXPECT_EQ(cli("gen --nonzero 0.1 --seed 1 " + path("x.ftc")).code, 1);  // no shape
    EXPECT_EQ(cli("gen --shape 2x2 --nonzero 0.1 --seed 1 " + path("x.ftc")).code, 1);
    EXPECT_EQ(cli("gen --shape 4 --profile vgg16/fc1 --nonzero 0.1 --seed 1 " + path("x.ftc")).code, 1);
    EXPECT_EQ(cli("gen --shape 4 --nonzero 1.5 --seed 1 " + path("x.ftc")).code, 1);
    ASSERT_EQ(cli("gen --shape 16 --nonzero 0.5 --seed 1 " + path("a.ftc")).code, 0);
    EXPECT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf") + " --codec nope").code, 1);
    EXPECT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf") + " --codec bzip2 --level 0").code, 1);
    EXPECT_EQ(cli("compress " + path("missing.ftc") + " " + path("a.fdf")).code, 2);
    EXPECT_EQ(cli("decompress " + path("a.ftc") + " " + path("b.ftc")).code, 2);  // not FDF1

    ASSERT_EQ(cli("compress " + path("a.ftc") + " " + path("a.fdf")).code, 0);
    auto bytes = read_file(dir / "a.fdf");
    bytes.back() ^= 1;
    write_file(dir / "bad.fdf", bytes);
    EXPECT_EQ(cli("decompress " + path("bad.fdf") + " " + path("b.ftc")).code, 2);
    EXPECT_EQ(cli("inspect " + path("nothing")).code, 2);

    EXPECT_EQ(cli("fetch --endpoint 127.0.0.1:1 --layer fc1 " + path("o.ftc")).code, 3);
    EXPECT_EQ(cli("fetch --endpoint nonsense --layer fc1 " + path("o.ftc")).code, 1);
}

TEST_F(Cli, ServeAndFetch) {
    std::filesystem::create_directory(dir / "store");
    ASSERT_EQ(cli("gen --profile vgg16/fc1 --nonzero 0.25 --seed 5 --source cat.jpg " + path("store/fc1.ftc")).code, 0);

    int pipefd[2];
    ASSERT_EQ(pipe(pipefd), 0);
    pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        dup2(pipefd[1], STDOUT_FILENO);
        close(pipefd[0]);
        execl(FEATSTREAM_CLI, FEATSTREAM_CLI, "serve", "--store", path("store").c_str(), "--listen", "127.0.0.1:0",
              static_cast<char*>(nullptr));
        _exit(127);
    }
    close(pipefd[1]);
    std::string line;
    char c;
    while (read(pipefd[0], &c, 1) == 1 && c != '\n') line += c;
    close(pipefd[0]);
    ASSERT_EQ(line.rfind("listening ", 0), 0u) << line;
    const std::string endpoint = line.substr(10);

    auto r = cli("fetch --endpoint " + endpoint + " --network vgg16 --layer fc1 --codec zeromask+bzip2 " + path("o.ftc"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("wire_bytes="), std::string::npos);
    EXPECT_EQ(read_file(dir / "o.ftc"), read_file(dir / "store/fc1.ftc"));
    EXPECT_EQ(cli("fetch --endpoint " + endpoint + " --network vgg16 --layer fc2 " + path("o2.ftc")).code, 3);

    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
}
