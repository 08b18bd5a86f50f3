#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <suc/genie.hpp>
#include <suc/trng.hpp>

namespace suc::protocol {

// Wire frame: type byte, u16 little-endian payload length, payload. One
// identification session is HELLO (device -> TA, serial number), then
// IDENT_CHALLENGE (TA -> device, y), IDENT_RESPONSE (device -> TA, x'),
// RESULT (TA -> device, 0x01 accept / 0x00 reject), close.
inline constexpr uint8_t kFrameIdentChallenge = 0x01;
inline constexpr uint8_t kFrameIdentResponse = 0x02;
inline constexpr uint8_t kFrameHello = 0x05;
inline constexpr uint8_t kFrameResult = 0x06;

struct Frame {
    uint8_t type = 0;
    std::vector<uint8_t> payload;
};

// Blocking, reliable, message-framed byte channel. recv blocks up to the
// channel's timeout (Timeout), raises ChannelFailure once the peer is gone.
class Channel {
public:
    virtual ~Channel() = default;
    virtual void send(const Frame& frame) = 0;
    virtual Frame recv() = 0;
    virtual void close() = 0;
};

// Connected in-process channel pair sharing a frame queue; both ends use the
// same receive timeout.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_pipe_channel(
    std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

class TcpChannel : public Channel {
public:
    TcpChannel(int fd, std::chrono::milliseconds timeout);
    ~TcpChannel() override;
    TcpChannel(TcpChannel&&) = delete;

    static std::unique_ptr<TcpChannel> connect(
        const std::string& host, uint16_t port,
        std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

    void send(const Frame& frame) override;
    Frame recv() override;
    void close() override;

private:
    int fd_ = -1;
    std::chrono::milliseconds timeout_;
};

class TcpListener {
public:
    // BindFailure when the address is taken or unusable. port 0 picks a free
    // port; port() reports the bound one.
    TcpListener(const std::string& bind_addr, uint16_t port,
                std::chrono::milliseconds io_timeout = std::chrono::milliseconds{5000});
    ~TcpListener();

    uint16_t port() const { return port_; }
    std::unique_ptr<TcpChannel> accept();
    void close();

private:
    int fd_ = -1;
    uint16_t port_ = 0;
    std::chrono::milliseconds io_timeout_;
};

// One challenge pair of a unit record. consumed pairs are spent forever.
struct UirPair {
    uint16_t index = 0;
    uint64_t x = 0;
    uint64_t y = 0;
    bool consumed = false;
};

// Unit individual record: all enrolled pairs for one serial number, indices
// dense from 0.
struct UirRecord {
    uint64_t sn = 0;
    std::vector<UirPair> pairs;
};

class UirStore {
public:
    bool contains(uint64_t sn) const { return records_.count(sn) != 0; }
    const UirRecord& record(uint64_t sn) const;  // UnknownSerial
    UirRecord& record(uint64_t sn);              // UnknownSerial
    void put(UirRecord rec);                     // insert or replace
    std::size_t size() const { return records_.size(); }
    const std::map<uint64_t, UirRecord>& records() const { return records_; }

private:
    std::map<uint64_t, UirRecord> records_;
};

// CSV persistence: header sn,idx,x_hex,y_hex,consumed; decimal sn and idx,
// 16 lowercase hex digits for x and y (big-endian rendering), consumed 0/1.
// Saves are atomic; loads validate uniqueness (DuplicateIndex) and density
// of indices and report ParseError with line and column.
void uir_save(const UirStore& store, const std::filesystem::path& path);
UirStore uir_load(const std::filesystem::path& path);

// Enrollment: t distinct uniform challenges x_i, y_i = SUC(x_i), all pairs
// fresh. t in [1, 65536]; DuplicateChallengeRetryExceeded if the generator
// keeps colliding (astronomically unlikely for a sound generator).
UirRecord enroll(const genie::SucInstance& device, uint64_t sn, std::size_t t, Trng& rng);

// What an authentic unit answers: the inverse mapping applied to y.
uint64_t device_respond(const genie::SucInstance& device, uint64_t y);

enum class Verdict { accepted, rejected, exhausted };
const char* verdict_name(Verdict v);

// TA side of one identification. Picks a random fresh pair, marks it
// consumed and persists BEFORE anything touches the wire (a challenge once
// sent is burned), then exchanges IDENT_CHALLENGE / IDENT_RESPONSE and sends
// RESULT. exhausted: no fresh pair; the channel is closed without a result.
// UnknownSerial, ChannelFailure, Timeout, ProtocolViolation.
Verdict identify(UirStore& store, uint64_t sn, Channel& ch, Trng& rng,
                 const std::function<void()>& persist = {});

// Reads the leading HELLO to learn the serial, then identify(). The HELLO
// serial is administrative (it selects the record; authenticity rests on the
// challenge pair alone).
Verdict ta_session(UirStore& store, Channel& ch, Trng& rng,
                   const std::function<void()>& persist = {},
                   uint64_t* sn_out = nullptr);

// Device side of one identification: HELLO, answer the challenge with the
// inverse mapping, read RESULT.
Verdict device_session(const genie::SucInstance& device, uint64_t sn, Channel& ch);

struct SessionEvent {
    uint64_t sn = 0;
    std::optional<Verdict> verdict;  // empty when the session errored
    std::string error;
};

struct ServeOptions {
    std::chrono::milliseconds io_timeout{5000};
    uint64_t max_sessions = 0;  // 0 = run until accept fails
};

// Sequential TA server: one session per accepted connection, store persisted
// through `persist` before each verdict. Per-session failures are reported
// through on_session and do not stop the server. Returns sessions handled.
uint64_t serve_ta(UirStore& store, TcpListener& listener, Trng& rng,
                  const std::function<void()>& persist, const ServeOptions& opts,
                  const std::function<void(const SessionEvent&)>& on_session = {});

// Sequential device-side server (unit waits for the TA to dial in).
uint64_t serve_device(const genie::SucInstance& device, uint64_t sn,
                      TcpListener& listener, const ServeOptions& opts,
                      const std::function<void(const SessionEvent&)>& on_session = {});

// Unit dials a listening TA and runs one session.
Verdict connect_device(const genie::SucInstance& device, uint64_t sn,
                       const std::string& host, uint16_t port,
                       std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

// TA dials a listening unit and runs one session (the unit still leads with
// HELLO). sn_out receives the serial the unit announced.
Verdict identify_connect(UirStore& store, const std::string& host, uint16_t port,
                         Trng& rng, const std::function<void()>& persist = {},
                         std::chrono::milliseconds timeout = std::chrono::milliseconds{5000},
                         uint64_t* sn_out = nullptr);

}  // namespace suc::protocol
