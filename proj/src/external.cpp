// Adapter for a user-supplied compressor command. The accumulated sequence is
// rendered as its token text and handed to the command ({in}/{out} expand to
// temp-file paths; absent placeholders fall back to stdin/stdout redirects);
// the code length is the output size in bytes times 8. Lengths are therefore
// integer-granular: additivity of conditional lengths holds exactly, but the
// strict-positivity property depends on the wrapped command.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "codec_backends.hpp"

namespace fs = std::filesystem;

namespace compstat::detail {
namespace {

class TempFile {
 public:
  TempFile() {
    path_ = (fs::temp_directory_path() / "compstat-XXXXXX").string();
    fd_ = ::mkstemp(path_.data());
    if (fd_ < 0) throw Error(errc::io_error, "cannot create temp file in " + path_);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  ~TempFile() {
    if (fd_ >= 0) ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int fd_ = -1;
};

// Replaces every occurrence; returns whether any replacement happened.
bool substitute(std::string& text, const std::string& placeholder, const std::string& value) {
  bool any = false;
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
    any = true;
  }
  return any;
}

std::string head_of_file(const std::string& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  std::string head(limit, '\0');
  in.read(head.data(), static_cast<std::streamsize>(limit));
  head.resize(static_cast<std::size_t>(in.gcount()));
  while (!head.empty() && (head.back() == '\n' || head.back() == '\r')) head.pop_back();
  return head;
}

class ExternalState final : public CodecState {
 public:
  ExternalState(AlphabetRef alphabet, std::string command)
      : alphabet_(std::move(alphabet)), command_(std::move(command)) {}

  void feed(std::span<const Symbol> symbols) override {
    for (Symbol s : symbols) text_ += alphabet_->token(s);
  }

  double bits() override {
    if (cached_for_ != text_.size()) {
      cached_bits_ = run();
      cached_for_ = text_.size();
    }
    return cached_bits_;
  }

  std::unique_ptr<CodecState> clone() const override {
    return std::make_unique<ExternalState>(*this);
  }

 private:
  double run() const {
    TempFile in, out, err;
    {
      std::ofstream f(in.path(), std::ios::binary);
      f.write(text_.data(), static_cast<std::streamsize>(text_.size()));
      if (!f) throw Error(errc::io_error, "cannot write compressor input " + in.path());
    }
    std::string line = command_;
    const bool has_in = substitute(line, "{in}", in.path());
    const bool has_out = substitute(line, "{out}", out.path());
    if (!has_in) line += " < " + in.path();
    if (!has_out) line += " > " + out.path();
    line += " 2> " + err.path();

    const int rc = std::system(line.c_str());
    if (rc == -1) {
      throw Error(errc::backend_error, "cannot launch shell for external compressor");
    }
    if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) {
      std::string diag = head_of_file(err.path(), 256);
      std::string status = WIFEXITED(rc) ? "exit status " + std::to_string(WEXITSTATUS(rc))
                                         : "abnormal termination";
      throw Error(errc::backend_error, "external compressor failed (" + status + "): " +
                                           command_ + (diag.empty() ? "" : " — " + diag));
    }
    std::error_code ec;
    const auto size = fs::file_size(out.path(), ec);
    if (ec) throw Error(errc::backend_error, "cannot stat compressor output: " + ec.message());
    return static_cast<double>(size) * 8.0;
  }

  AlphabetRef alphabet_;
  std::string command_;
  std::string text_;
  std::size_t cached_for_ = static_cast<std::size_t>(-1);
  double cached_bits_ = 0.0;
};

class ExternalCodec final : public Codec {
 public:
  ExternalCodec(AlphabetRef alphabet, std::string command)
      : alphabet_(std::move(alphabet)), command_(std::move(command)) {}
  const AlphabetRef& alphabet() const override { return alphabet_; }
  std::unique_ptr<CodecState> start() const override {
    return std::make_unique<ExternalState>(alphabet_, command_);
  }

 private:
  AlphabetRef alphabet_;
  std::string command_;
};

}  // namespace

std::unique_ptr<Codec> make_external(const ExternalSpec& spec, AlphabetRef alphabet) {
  if (spec.command.empty()) {
    throw Error(errc::domain_error, "external compressor command must not be empty");
  }
  return std::make_unique<ExternalCodec>(std::move(alphabet), spec.command);
}

}  // namespace compstat::detail
