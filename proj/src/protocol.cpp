#include <suc/protocol.hpp>

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <suc/errors.hpp>

namespace suc::protocol {

namespace {

std::vector<uint8_t> u64_payload(uint64_t v) {
    std::vector<uint8_t> out(8);
    for (int i = 0; i < 8; ++i) out[i] = uint8_t(v >> (8 * i));
    return out;
}

uint64_t read_u64(const std::vector<uint8_t>& p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t{p[i]} << (8 * i);
    return v;
}

void expect_frame(const Frame& f, uint8_t type, std::size_t payload_len,
                  const char* what) {
    if (f.type != type || f.payload.size() != payload_len) {
        std::ostringstream msg;
        msg << "expected " << what << " (type 0x" << std::hex << int(type) << ", "
            << std::dec << payload_len << " bytes), got type 0x" << std::hex
            << int(f.type) << " with " << std::dec << f.payload.size() << " bytes";
        raise(Errc::protocol_violation, msg.str());
    }
}

// ---- in-process channel ----

struct PipeCore {
    std::mutex m;
    std::condition_variable cv;
    std::deque<Frame> q[2];  // q[i]: frames sent by end i
    bool open[2] = {true, true};
};

class PipeEnd final : public Channel {
public:
    PipeEnd(std::shared_ptr<PipeCore> core, int me, std::chrono::milliseconds timeout)
        : core_(std::move(core)), me_(me), timeout_(timeout) {}

    ~PipeEnd() override { PipeEnd::close(); }

    void send(const Frame& frame) override {
        std::lock_guard<std::mutex> lk(core_->m);
        if (!core_->open[me_]) raise(Errc::channel_failure, "send on closed channel");
        if (!core_->open[1 - me_]) raise(Errc::channel_failure, "peer closed the channel");
        core_->q[me_].push_back(frame);
        core_->cv.notify_all();
    }

    Frame recv() override {
        std::unique_lock<std::mutex> lk(core_->m);
        auto& q = core_->q[1 - me_];
        if (!core_->cv.wait_for(lk, timeout_, [&] {
                return !q.empty() || !core_->open[1 - me_] || !core_->open[me_];
            }))
            raise(Errc::timeout, "receive timed out");
        if (!q.empty()) {
            Frame f = std::move(q.front());
            q.pop_front();
            return f;
        }
        raise(Errc::channel_failure, "channel closed");
    }

    void close() override {
        std::lock_guard<std::mutex> lk(core_->m);
        core_->open[me_] = false;
        core_->cv.notify_all();
    }

private:
    std::shared_ptr<PipeCore> core_;
    int me_;
    std::chrono::milliseconds timeout_;
};

// ---- TCP helpers ----

void set_io_timeout(int fd, std::chrono::milliseconds t) {
    timeval tv{};
    tv.tv_sec = long(t.count() / 1000);
    tv.tv_usec = long(t.count() % 1000) * 1000;
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void write_all(int fd, const uint8_t* p, std::size_t n) {
    while (n > 0) {
        const ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
        if (k < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                raise(Errc::timeout, "send timed out");
            raise(Errc::channel_failure, std::string("send: ") + std::strerror(errno));
        }
        p += k;
        n -= std::size_t(k);
    }
}

void read_exact(int fd, uint8_t* p, std::size_t n) {
    while (n > 0) {
        const ssize_t k = ::recv(fd, p, n, 0);
        if (k == 0) raise(Errc::channel_failure, "peer closed the connection");
        if (k < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                raise(Errc::timeout, "receive timed out");
            raise(Errc::channel_failure, std::string("recv: ") + std::strerror(errno));
        }
        p += k;
        n -= std::size_t(k);
    }
}

// ---- CSV helpers ----

void append_hex64(std::string& out, uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) out.push_back(digits[(v >> (4 * i)) & 0xF]);
}

[[noreturn]] void csv_error(std::size_t line, std::size_t col, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line << ", column " << col << ": " << what;
    raise(Errc::parse_error, msg.str());
}

uint64_t parse_decimal(const std::string& field, std::size_t line, std::size_t col,
                       const char* name) {
    if (field.empty()) csv_error(line, col, std::string(name) + " is empty");
    uint64_t v = 0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const char c = field[i];
        if (c < '0' || c > '9')
            csv_error(line, col + i, std::string(name) + " must be decimal");
        if (v > (UINT64_MAX - uint64_t(c - '0')) / 10)
            csv_error(line, col + i, std::string(name) + " overflows 64 bits");
        v = v * 10 + uint64_t(c - '0');
    }
    return v;
}

uint64_t parse_hex64(const std::string& field, std::size_t line, std::size_t col,
                     const char* name) {
    if (field.size() != 16)
        csv_error(line, col, std::string(name) + " must be 16 hex digits");
    uint64_t v = 0;
    for (std::size_t i = 0; i < 16; ++i) {
        const char c = field[i];
        int nib;
        if (c >= '0' && c <= '9')
            nib = c - '0';
        else if (c >= 'a' && c <= 'f')
            nib = c - 'a' + 10;
        else
            csv_error(line, col + i, std::string(name) + " must be lowercase hex");
        v = v << 4 | uint64_t(nib);
    }
    return v;
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_pipe_channel(
    std::chrono::milliseconds timeout) {
    auto core = std::make_shared<PipeCore>();
    return {std::make_unique<PipeEnd>(core, 0, timeout),
            std::make_unique<PipeEnd>(core, 1, timeout)};
}

TcpChannel::TcpChannel(int fd, std::chrono::milliseconds timeout)
    : fd_(fd), timeout_(timeout) {
    set_io_timeout(fd_, timeout_);
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpChannel::~TcpChannel() { close(); }

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& host, uint16_t port,
                                                std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res)
        raise(Errc::channel_failure, "cannot resolve " + host);
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0)
        raise(Errc::channel_failure, "cannot connect to " + host + ":" + service);
    return std::make_unique<TcpChannel>(fd, timeout);
}

void TcpChannel::send(const Frame& frame) {
    if (fd_ < 0) raise(Errc::channel_failure, "send on closed channel");
    if (frame.payload.size() > 0xFFFF)
        raise(Errc::protocol_violation, "frame payload exceeds 65535 bytes");
    uint8_t header[3] = {frame.type, uint8_t(frame.payload.size()),
                         uint8_t(frame.payload.size() >> 8)};
    write_all(fd_, header, sizeof header);
    if (!frame.payload.empty()) write_all(fd_, frame.payload.data(), frame.payload.size());
}

Frame TcpChannel::recv() {
    if (fd_ < 0) raise(Errc::channel_failure, "recv on closed channel");
    uint8_t header[3];
    read_exact(fd_, header, sizeof header);
    Frame f;
    f.type = header[0];
    f.payload.resize(std::size_t(header[1]) | std::size_t(header[2]) << 8);
    if (!f.payload.empty()) read_exact(fd_, f.payload.data(), f.payload.size());
    return f;
}

void TcpChannel::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpListener::TcpListener(const std::string& bind_addr, uint16_t port,
                         std::chrono::milliseconds io_timeout)
    : io_timeout_(io_timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (getaddrinfo(bind_addr.c_str(), service.c_str(), &hints, &res) != 0 || !res)
        raise(Errc::bind_failure, "cannot resolve bind address " + bind_addr);
    std::string err = "no usable address";
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd_ < 0) continue;
        int one = 1;
        setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd_, 16) == 0) break;
        err = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
    }
    freeaddrinfo(res);
    if (fd_ < 0)
        raise(Errc::bind_failure,
              "cannot listen on " + bind_addr + ":" + service + ": " + err);
    sockaddr_storage sa{};
    socklen_t len = sizeof sa;
    if (getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) == 0) {
        if (sa.ss_family == AF_INET)
            port_ = ntohs(reinterpret_cast<sockaddr_in&>(sa).sin_port);
        else if (sa.ss_family == AF_INET6)
            port_ = ntohs(reinterpret_cast<sockaddr_in6&>(sa).sin6_port);
    }
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<TcpChannel> TcpListener::accept() {
    if (fd_ < 0) raise(Errc::channel_failure, "accept on closed listener");
    for (;;) {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) return std::make_unique<TcpChannel>(fd, io_timeout_);
        if (errno == EINTR) continue;
        raise(Errc::channel_failure, std::string("accept: ") + std::strerror(errno));
    }
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

const UirRecord& UirStore::record(uint64_t sn) const {
    const auto it = records_.find(sn);
    if (it == records_.end())
        raise(Errc::unknown_serial, "no record for serial " + std::to_string(sn));
    return it->second;
}

UirRecord& UirStore::record(uint64_t sn) {
    const auto it = records_.find(sn);
    if (it == records_.end())
        raise(Errc::unknown_serial, "no record for serial " + std::to_string(sn));
    return it->second;
}

void UirStore::put(UirRecord rec) {
    std::sort(rec.pairs.begin(), rec.pairs.end(),
              [](const UirPair& a, const UirPair& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < rec.pairs.size(); ++i) {
        if (i > 0 && rec.pairs[i].index == rec.pairs[i - 1].index)
            raise(Errc::duplicate_index, "duplicate pair index " +
                                             std::to_string(rec.pairs[i].index) +
                                             " for serial " + std::to_string(rec.sn));
        if (rec.pairs[i].index != i)
            raise(Errc::invalid_spec, "pair indices must be dense from 0");
    }
    records_[rec.sn] = std::move(rec);
}

void uir_save(const UirStore& store, const std::filesystem::path& path) {
    std::string out = "sn,idx,x_hex,y_hex,consumed\n";
    for (const auto& [sn, rec] : store.records())
        for (const UirPair& p : rec.pairs) {
            out += std::to_string(sn);
            out.push_back(',');
            out += std::to_string(p.index);
            out.push_back(',');
            append_hex64(out, p.x);
            out.push_back(',');
            append_hex64(out, p.y);
            out.push_back(',');
            out.push_back(p.consumed ? '1' : '0');
            out.push_back('\n');
        }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f.write(out.data(), std::streamsize(out.size()));
        if (!f) raise(Errc::io_failure, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) raise(Errc::io_failure, "cannot move record file into place: " + ec.message());
}

UirStore uir_load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(Errc::io_failure, "cannot open " + path.string());
    UirStore store;
    std::map<uint64_t, UirRecord> partial;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "sn,idx,x_hex,y_hex,consumed")
                csv_error(1, 1, "bad header, expected sn,idx,x_hex,y_hex,consumed");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::vector<std::size_t> cols;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            cols.push_back(start + 1);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 5)
            csv_error(lineno, 1, "expected 5 comma-separated fields, got " +
                                     std::to_string(fields.size()));
        UirPair p;
        const uint64_t sn = parse_decimal(fields[0], lineno, cols[0], "sn");
        const uint64_t idx = parse_decimal(fields[1], lineno, cols[1], "idx");
        if (idx > 0xFFFF) csv_error(lineno, cols[1], "idx exceeds 16 bits");
        p.index = uint16_t(idx);
        p.x = parse_hex64(fields[2], lineno, cols[2], "x_hex");
        p.y = parse_hex64(fields[3], lineno, cols[3], "y_hex");
        if (fields[4] == "0")
            p.consumed = false;
        else if (fields[4] == "1")
            p.consumed = true;
        else
            csv_error(lineno, cols[4], "consumed must be 0 or 1");
        auto& rec = partial[sn];
        rec.sn = sn;
        rec.pairs.push_back(p);
    }
    for (auto& [sn, rec] : partial) store.put(std::move(rec));
    return store;
}

UirRecord enroll(const genie::SucInstance& device, uint64_t sn, std::size_t t,
                 Trng& rng) {
    if (t < 1 || t > 65536)
        raise(Errc::index_out_of_range, "pair count must be in [1, 65536]");
    UirRecord rec;
    rec.sn = sn;
    rec.pairs.reserve(t);
    std::unordered_set<uint64_t> seen;
    int duplicate_budget = 1000;
    while (rec.pairs.size() < t) {
        const uint64_t x = rng.draw_bits(64);
        if (!seen.insert(x).second) {
            if (--duplicate_budget == 0)
                raise(Errc::duplicate_challenge_retry_exceeded,
                      "generator keeps producing duplicate challenges");
            continue;
        }
        rec.pairs.push_back(
            {uint16_t(rec.pairs.size()), x, genie::instance_encrypt(device, x), false});
    }
    return rec;
}

uint64_t device_respond(const genie::SucInstance& device, uint64_t y) {
    return genie::instance_decrypt(device, y);
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::accepted: return "accepted";
        case Verdict::rejected: return "rejected";
        case Verdict::exhausted: return "exhausted";
    }
    return "unknown";
}

Verdict identify(UirStore& store, uint64_t sn, Channel& ch, Trng& rng,
                 const std::function<void()>& persist) {
    UirRecord& rec = store.record(sn);
    std::vector<std::size_t> fresh;
    for (std::size_t i = 0; i < rec.pairs.size(); ++i)
        if (!rec.pairs[i].consumed) fresh.push_back(i);
    if (fresh.empty()) {
        ch.close();
        return Verdict::exhausted;
    }
    UirPair& pair = rec.pairs[fresh[rng.uniform_below(fresh.size())]];
    pair.consumed = true;  // burned once chosen, whatever happens on the wire
    if (persist) persist();
    ch.send(Frame{kFrameIdentChallenge, u64_payload(pair.y)});
    const Frame resp = ch.recv();
    expect_frame(resp, kFrameIdentResponse, 8, "IDENT_RESPONSE");
    const bool ok = read_u64(resp.payload) == pair.x;
    ch.send(Frame{kFrameResult, {uint8_t(ok ? 1 : 0)}});
    return ok ? Verdict::accepted : Verdict::rejected;
}

Verdict ta_session(UirStore& store, Channel& ch, Trng& rng,
                   const std::function<void()>& persist, uint64_t* sn_out) {
    const Frame hello = ch.recv();
    expect_frame(hello, kFrameHello, 8, "HELLO");
    const uint64_t sn = read_u64(hello.payload);
    if (sn_out) *sn_out = sn;
    return identify(store, sn, ch, rng, persist);
}

Verdict device_session(const genie::SucInstance& device, uint64_t sn, Channel& ch) {
    ch.send(Frame{kFrameHello, u64_payload(sn)});
    const Frame challenge = ch.recv();
    expect_frame(challenge, kFrameIdentChallenge, 8, "IDENT_CHALLENGE");
    const uint64_t answer = device_respond(device, read_u64(challenge.payload));
    ch.send(Frame{kFrameIdentResponse, u64_payload(answer)});
    const Frame result = ch.recv();
    expect_frame(result, kFrameResult, 1, "RESULT");
    if (result.payload[0] > 1)
        raise(Errc::protocol_violation, "RESULT byte must be 0 or 1");
    return result.payload[0] ? Verdict::accepted : Verdict::rejected;
}

uint64_t serve_ta(UirStore& store, TcpListener& listener, Trng& rng,
                  const std::function<void()>& persist, const ServeOptions& opts,
                  const std::function<void(const SessionEvent&)>& on_session) {
    uint64_t handled = 0;
    while (opts.max_sessions == 0 || handled < opts.max_sessions) {
        std::unique_ptr<TcpChannel> ch;
        try {
            ch = listener.accept();
        } catch (const SucError&) {
            break;  // listener closed or failed; stop serving
        }
        SessionEvent ev;
        try {
            ev.verdict = ta_session(store, *ch, rng, persist, &ev.sn);
        } catch (const SucError& e) {
            ev.error = e.what();
        }
        ++handled;
        if (on_session) on_session(ev);
    }
    return handled;
}

uint64_t serve_device(const genie::SucInstance& device, uint64_t sn,
                      TcpListener& listener, const ServeOptions& opts,
                      const std::function<void(const SessionEvent&)>& on_session) {
    uint64_t handled = 0;
    while (opts.max_sessions == 0 || handled < opts.max_sessions) {
        std::unique_ptr<TcpChannel> ch;
        try {
            ch = listener.accept();
        } catch (const SucError&) {
            break;
        }
        SessionEvent ev;
        ev.sn = sn;
        try {
            ev.verdict = device_session(device, sn, *ch);
        } catch (const SucError& e) {
            ev.error = e.what();
        }
        ++handled;
        if (on_session) on_session(ev);
    }
    return handled;
}

Verdict connect_device(const genie::SucInstance& device, uint64_t sn,
                       const std::string& host, uint16_t port,
                       std::chrono::milliseconds timeout) {
    const auto ch = TcpChannel::connect(host, port, timeout);
    return device_session(device, sn, *ch);
}

Verdict identify_connect(UirStore& store, const std::string& host, uint16_t port,
                         Trng& rng, const std::function<void()>& persist,
                         std::chrono::milliseconds timeout, uint64_t* sn_out) {
    const auto ch = TcpChannel::connect(host, port, timeout);
    return ta_session(store, *ch, rng, persist, sn_out);
}

}  // namespace suc::protocol
