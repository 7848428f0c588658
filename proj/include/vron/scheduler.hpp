#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vron/attest.hpp"
#include "vron/camera.hpp"
#include "vron/stages.hpp"
#include "vron/transport.hpp"
#include "vron/wire.hpp"

namespace vron {

// Untrusted orchestrator. It spawns one worker per stage, exchanges
// certificates at setup so each stage pins its upstream key before any frame
// flows, and from then on only relays framed bytes between workers. Every
// hand-off crosses the scheduler, which can drop, reorder, or corrupt bytes
// but cannot forge anything the stages or the consumer will accept.
//
// Both transports share this hub-and-spoke shape; they differ only in the
// channel medium (bounded in-memory queues vs loopback TCP sockets), so a
// job yields byte-identical bundles on either transport given the same keys
// and clocks.

enum class Transport { InProcess, Tcp };

struct JobSpec {
  std::vector<FilterSpec> filter_chain;  // empty = decode/encode passthrough
  std::string input_path;
  std::string output_path;
  Transport transport = Transport::InProcess;
};

// ---------------------------------------------------------------------------
// Boundaries and interceptors

enum class Boundary : std::uint8_t {
  CameraToDecoder = 0,
  DecoderToFilter = 1,
  FilterToFilter = 2,  // addressed with an index: 0 is the first→second gap
  FilterToEncoder = 3,
  DecoderToEncoderSidecar = 4,
};

inline const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::CameraToDecoder: return "camera_to_decoder";
    case Boundary::DecoderToFilter: return "decoder_to_filter";
    case Boundary::FilterToFilter: return "filter_to_filter";
    case Boundary::FilterToEncoder: return "filter_to_encoder";
    case Boundary::DecoderToEncoderSidecar: return "decoder_to_encoder_sidecar";
  }
  return "unknown";
}

/// Transforms the framed byte stream crossing one boundary. on_message maps
/// one framed message to zero or more replacement byte blobs, forwarded
/// verbatim; on_flush emits anything held back once the edge drains.
struct ByteInterceptor {
  std::function<std::vector<Bytes>(std::size_t index, Bytes framed)> on_message;
  std::function<std::vector<Bytes>()> on_flush;
};

/// Keyed by (boundary, index); the index is meaningful only for
/// FilterToFilter and is 0 elsewhere.
using InterceptorSet = std::map<std::pair<Boundary, std::uint32_t>, ByteInterceptor>;

// ---------------------------------------------------------------------------
// Stage worker identities and the decoder pool

struct StageWorker {
  std::uint64_t id = 0;
  KeyPair key;
  StageCertificate cert;
};

inline StageWorker make_worker(const Authority& authority, StageRole role,
                               const Measurement& measurement, const KeySeedSource& seeds,
                               std::uint64_t id) {
  StageWorker w;
  w.id = id;
  w.key = keypair_from_seed(seeds());
  w.cert = issue_stage_certificate(authority, w.key.public_key, measurement, role);
  return w;
}

/// Pool of pre-initialized decoder workers. Released workers are key-rotated
/// (fresh keypair, re-issued certificate) before they can serve another job,
/// so no two jobs ever share a decoder key, and no two concurrent jobs ever
/// share a worker.
class DecoderPool {
public:
  DecoderPool(const Authority& authority, KeySeedSource seeds = random_seed_source(),
              std::size_t capacity = 4)
      : authority_(&authority), seeds_(std::move(seeds)), capacity_(capacity) {}

  StageWorker acquire() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      if (!idle_.empty()) {
        StageWorker w = std::move(idle_.front());
        idle_.pop_front();
        return w;
      }
    }
    ++spawned_;
    auto t0 = std::chrono::steady_clock::now();
    StageWorker w = make_worker(*authority_, StageRole::Decoder, decoder_measurement(), seeds_,
                                next_id_.fetch_add(1));
    last_spawn_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
    return w;
  }

  void release(StageWorker w) {
    w.key = keypair_from_seed(seeds_());
    w.cert = issue_stage_certificate(*authority_, w.key.public_key, decoder_measurement(),
                                     StageRole::Decoder);
    std::lock_guard<std::mutex> lk(mu_);
    if (idle_.size() < capacity_) idle_.push_back(std::move(w));
  }

  std::size_t idle_count() const {
    std::lock_guard<std::mutex> lk(mu_);
    return idle_.size();
  }
  std::size_t spawned_count() const { return spawned_.load(); }
  /// Initialization cost of the most recent cold spawn (keygen plus
  /// certificate issue); pool hits avoid it.
  double last_spawn_seconds() const { return last_spawn_seconds_.load(); }

private:
  const Authority* authority_;
  KeySeedSource seeds_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<StageWorker> idle_;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::size_t> spawned_{0};
  std::atomic<double> last_spawn_seconds_{0};
};

// ---------------------------------------------------------------------------
// Stage service loops. Each worker reads framed objects from `in`, writes
// framed objects to `out`, and reports failures as an Error object before
// closing. The loops are medium-agnostic.

namespace detail {

inline void send_object(const ByteSink& out, MsgType type, const Bytes& object) {
  for (auto& framed : frame_object(type, object)) out.write(framed);
}

inline void send_error(const ByteSink& out, const Error& e) {
  try {
    send_object(out, MsgType::Error, encode_error_payload(e.code(), e.what()));
  } catch (...) {
  }
}

/// Next fully assembled object, or nullopt at end of stream.
inline std::optional<std::pair<MsgType, Bytes>> recv_object(StreamReader& in,
                                                            ObjectAssembler& assembler) {
  while (true) {
    auto m = wire_decode(in);
    if (!m) {
      if (assembler.mid_object()) fail(ErrorCode::Truncated, "stream ended mid-object");
      return std::nullopt;
    }
    if (auto done = assembler.feed(*m)) return done;
  }
}

inline Bytes encode_cert_list(const std::vector<StageCertificate>& certs) {
  Bytes b;
  ByteWriter w(b);
  w.u32(static_cast<std::uint32_t>(certs.size()));
  for (const auto& c : certs) w.blob32(c.encode());
  return b;
}

inline std::vector<StageCertificate> decode_cert_list(const Bytes& b) {
  ByteReader r(b);
  std::uint32_t n = r.u32();
  std::vector<Bytes> raw;
  for (std::uint32_t i = 0; i < n && !r.failed(); ++i) raw.push_back(r.blob32());
  if (r.failed() || !r.done()) fail(ErrorCode::MalformedMessage, "bad certificate list");
  std::vector<StageCertificate> certs;
  for (const auto& c : raw) certs.push_back(StageCertificate::decode(c));
  return certs;
}

}  // namespace detail

/// Decoder worker: start the certificate chain with its own certificate,
/// receive one signed segment, then emit per-frame messages followed by the
/// sidecar.
inline void serve_decoder(StreamReader in, ByteSink out, const TrustRoots& trust,
                          StageWorker worker) {
  ObjectAssembler assembler;
  try {
    detail::send_object(out, MsgType::CertExchange, detail::encode_cert_list({worker.cert}));
    auto obj = detail::recv_object(in, assembler);
    if (!obj || obj->first != MsgType::Segment)
      fail(ErrorCode::MalformedMessage, "decoder expected a segment");
    SignedSegment segment = decode_signed_segment(obj->second);
    DecoderStage stage(trust, std::move(worker.key), worker.cert);
    DecoderOutput result = stage.run(segment);
    for (const auto& f : result.frames)
      detail::send_object(out, MsgType::Frame, encode_frame_message(f));
    detail::send_object(out, MsgType::Sidecar, encode_sidecar(result.sidecar));
  } catch (const Error& e) {
    detail::send_error(out, e);
  } catch (const std::exception& e) {
    detail::send_error(out, Error(ErrorCode::StageCrashed, e.what()));
  }
  out.close();
}

/// Filter worker: receive the certificate chain gathered so far, pin the
/// last entry (the immediate upstream), forward the chain extended with this
/// stage's certificate, then map frames until the stream ends.
inline void serve_filter(StreamReader in, ByteSink out, const TrustRoots& trust,
                         const FilterSpec& spec, StageWorker worker) {
  ObjectAssembler assembler;
  try {
    FilterStage stage(trust, spec, std::move(worker.key), worker.cert);
    auto first = detail::recv_object(in, assembler);
    if (first && first->first == MsgType::Error) {
      auto [code, what] = decode_error_payload(first->second);
      throw Error(code, "upstream: " + what);
    }
    if (!first || first->first != MsgType::CertExchange)
      fail(ErrorCode::MalformedMessage, "filter expected the upstream certificate chain");
    auto certs = detail::decode_cert_list(first->second);
    if (certs.empty()) fail(ErrorCode::MalformedMessage, "empty certificate chain");
    stage.pin_upstream(certs.back());
    certs.push_back(worker.cert);
    detail::send_object(out, MsgType::CertExchange, detail::encode_cert_list(certs));
    while (auto obj = detail::recv_object(in, assembler)) {
      if (obj->first == MsgType::Error) {
        auto [code, what] = decode_error_payload(obj->second);
        throw Error(code, "upstream: " + what);
      }
      if (obj->first != MsgType::Frame)
        fail(ErrorCode::MalformedMessage, "filter expected a frame");
      FrameMessage result = stage.process(decode_frame_message(obj->second));
      detail::send_object(out, MsgType::Frame, encode_frame_message(result));
    }
  } catch (const Error& e) {
    detail::send_error(out, e);
  } catch (const std::exception& e) {
    detail::send_error(out, Error(ErrorCode::StageCrashed, e.what()));
  }
  out.close();
}

/// Encoder worker: receives the certificate chain (decoder plus every
/// filter), frames, and the sidecar, then emits the final bundle carrying
/// the whole chain. The chain always precedes frames on the frame path, but
/// the sidecar arrives on its own path and may come first.
inline void serve_encoder(StreamReader in, ByteSink out, const TrustRoots& trust,
                          StageWorker worker) {
  ObjectAssembler assembler;
  try {
    EncoderStage stage(trust, std::move(worker.key), worker.cert);
    bool chain_pinned = false;
    while (auto obj = detail::recv_object(in, assembler)) {
      if (obj->first == MsgType::CertExchange) {
        if (chain_pinned)
          fail(ErrorCode::MalformedMessage, "encoder received a second certificate chain");
        auto certs = detail::decode_cert_list(obj->second);
        if (certs.empty()) fail(ErrorCode::MalformedMessage, "empty certificate chain");
        stage.pin_upstream(certs.back());
        for (const auto& c : certs)
          if (!verify_certificate(trust.attestation_authority_public_key, c))
            fail(ErrorCode::UpstreamCertUntrusted, "stage certificate not from authority");
        stage.add_stage_certificates(certs);
        chain_pinned = true;
      } else if (obj->first == MsgType::Frame) {
        if (!chain_pinned)
          fail(ErrorCode::MalformedMessage, "frame arrived before the certificate chain");
        stage.add_frame(decode_frame_message(obj->second));
      } else if (obj->first == MsgType::Sidecar) {
        stage.set_sidecar(decode_sidecar(obj->second));
      } else if (obj->first == MsgType::Error) {
        auto [code, what] = decode_error_payload(obj->second);
        throw Error(code, "upstream: " + what);
      } else {
        fail(ErrorCode::MalformedMessage, "encoder expected frames or the sidecar");
      }
    }
    if (!chain_pinned)
      fail(ErrorCode::MalformedMessage, "stream ended before the certificate chain");
    FinalBundle bundle = stage.finalize();
    detail::send_object(out, MsgType::Bundle, encode_final_bundle(bundle));
  } catch (const Error& e) {
    detail::send_error(out, e);
  } catch (const std::exception& e) {
    detail::send_error(out, Error(ErrorCode::StageCrashed, e.what()));
  }
  out.close();
}

// ---------------------------------------------------------------------------
// run_segment / run_job

struct RunOptions {
  KeySeedSource seeds = random_seed_source();
  DecoderPool* pool = nullptr;      // optional decoder worker reuse
  InterceptorSet interceptors;      // adversarial byte transforms per boundary
  std::size_t inflight_window = 8;  // bounded in-flight messages per edge
};

namespace detail {

// One relay edge: applies the boundary interceptor to each framed message,
// buffering the (possibly rewritten) bytes of one object and emitting them
// in a single sink write, so that two edges feeding the same sink (frames
// and sidecar into the encoder) never interleave inside an object.
class Edge {
public:
  Edge(ByteSink sink, const ByteInterceptor* icpt) : sink_(std::move(sink)) {
    if (icpt) icpt_ = *icpt;
  }

  /// `framed` must be one wire message of an honest stage; `object_end`
  /// marks its object's final chunk.
  void send(Bytes framed, bool object_end) {
    if (icpt_.on_message) {
      for (auto& b : icpt_.on_message(index_++, std::move(framed))) append(buf_, b);
    } else {
      append(buf_, framed);
    }
    if (object_end && !buf_.empty()) {
      sink_.write(buf_);
      buf_.clear();
    }
  }

  void finish() {
    if (done_) return;
    done_ = true;
    if (icpt_.on_flush)
      for (auto& b : icpt_.on_flush()) append(buf_, b);
    if (!buf_.empty()) sink_.write(buf_);
    buf_.clear();
    sink_.close();
  }

private:
  ByteSink sink_;
  ByteInterceptor icpt_{};
  Bytes buf_;
  std::size_t index_ = 0;
  bool done_ = false;
};

/// Final chunk of its object, read from the honest chunk envelope.
inline bool is_final_chunk(const WireMessage& m) {
  if (m.payload.size() < kChunkHeaderBytes) return true;
  ByteReader r(m.payload);
  std::uint32_t index = r.u32();
  std::uint32_t count = r.u32();
  return index + 1 >= count;
}

struct HubChannels {
  // Worker-side endpoints, consumed by the stage thread.
  std::optional<StreamReader> worker_in;
  std::optional<ByteSink> worker_out;
  // Hub-side endpoints.
  std::optional<StreamReader> hub_in;
  std::optional<ByteSink> hub_out;
  // Unblocks writers into the stage after the worker exits.
  std::function<void()> abort_input;
};

}  // namespace detail

/// Runs one signed segment through decoder → filters → encoder and returns
/// the final bundle. Any chain-verification failure inside a stage surfaces
/// as PipelineRejected with the stage error preserved as the cause.
inline FinalBundle run_segment(const SignedSegment& segment,
                               const std::vector<FilterSpec>& chain, const TrustRoots& trust,
                               const Authority& authority, Transport transport = Transport::InProcess,
                               RunOptions options = {}) {
  for (const auto& spec : chain) validate_filter_spec(spec);
  const std::size_t k = chain.size();
  const std::size_t stages = k + 2;  // decoder, filters..., encoder

  // Worker identities first, in fixed order, so deterministic seed sources
  // reproduce the same keys regardless of transport or timing.
  std::uint64_t next_id = 1;
  StageWorker dec = options.pool ? options.pool->acquire()
                                 : make_worker(authority, StageRole::Decoder,
                                               decoder_measurement(), options.seeds, next_id++);
  std::vector<StageWorker> filter_workers;
  for (const auto& spec : chain)
    filter_workers.push_back(make_worker(authority, StageRole::Filter,
                                         filter_measurement(spec.name), options.seeds,
                                         next_id++));
  StageWorker enc = make_worker(authority, StageRole::Encoder, encoder_measurement(),
                                options.seeds, next_id++);

  struct PoolReturn {
    DecoderPool* pool;
    StageWorker worker;
    ~PoolReturn() {
      if (pool) pool->release(std::move(worker));
    }
  } pool_return{options.pool, dec};

  // Duplex channel per stage. abort_input releases anything still blocked
  // writing into a stage once its worker has exited (a rejecting stage must
  // not leave upstream relays stuck on a full channel). TCP channels get
  // this for free when the worker's socket closes.
  std::vector<detail::HubChannels> ch(stages);
  std::vector<std::unique_ptr<TcpListener>> listeners;
  if (transport == Transport::InProcess) {
    for (auto& c : ch) {
      auto to_stage = std::make_shared<BytePipe>(options.inflight_window);
      auto from_stage = std::make_shared<BytePipe>(options.inflight_window);
      c.worker_in = reader_from_pipe(to_stage);
      c.worker_out = sink_from_pipe(from_stage);
      c.hub_in = reader_from_pipe(from_stage);
      c.hub_out = sink_from_pipe(to_stage);
      c.abort_input = [to_stage] { to_stage->close(); };
    }
  } else {
    for (auto& c : ch) {
      listeners.push_back(std::make_unique<TcpListener>());
      auto hub_sock =
          std::make_shared<TcpSocket>(TcpSocket::connect_to("127.0.0.1", listeners.back()->port()));
      auto stage_sock = std::make_shared<TcpSocket>(listeners.back()->accept());
      c.worker_in = reader_from_socket(stage_sock);
      c.worker_out = sink_from_socket(stage_sock);
      c.hub_in = reader_from_socket(hub_sock);
      c.hub_out = sink_from_socket(hub_sock);
      c.abort_input = [] {};
    }
  }

  // Stage threads.
  std::vector<std::thread> threads;
  struct Joiner {
    std::vector<std::thread>* ts;
    ~Joiner() {
      for (auto& t : *ts)
        if (t.joinable()) t.join();
    }
  } joiner{&threads};

  threads.emplace_back([&trust, w = dec, in = std::move(*ch[0].worker_in),
                        out = *ch[0].worker_out, abort = ch[0].abort_input]() mutable {
    serve_decoder(std::move(in), std::move(out), trust, std::move(w));
    abort();
  });
  for (std::size_t i = 0; i < k; ++i)
    threads.emplace_back([&trust, spec = chain[i], w = filter_workers[i],
                          in = std::move(*ch[1 + i].worker_in), out = *ch[1 + i].worker_out,
                          abort = ch[1 + i].abort_input]() mutable {
      serve_filter(std::move(in), std::move(out), trust, spec, std::move(w));
      abort();
    });
  threads.emplace_back([&trust, w = enc, in = std::move(*ch[1 + k].worker_in),
                        out = *ch[1 + k].worker_out, abort = ch[1 + k].abort_input]() mutable {
    serve_encoder(std::move(in), std::move(out), trust, std::move(w));
    abort();
  });

  std::optional<Error> first_error;
  auto record_error = [&](const Error& e) {
    if (!first_error) first_error = e;
  };

  // Edges. The interceptor lookup treats DecoderToFilter as the first frame
  // edge and FilterToEncoder as the last one; with zero filters both resolve
  // to the single decoder→encoder edge.
  auto find_icpt = [&](Boundary b, std::uint32_t idx) -> const ByteInterceptor* {
    auto it = options.interceptors.find({b, idx});
    return it == options.interceptors.end() ? nullptr : &it->second;
  };
  auto frame_edge_icpt = [&](std::size_t edge_idx) -> const ByteInterceptor* {
    if (edge_idx == 0)
      if (auto* p = find_icpt(Boundary::DecoderToFilter, 0)) return p;
    if (edge_idx == k)
      if (auto* p = find_icpt(Boundary::FilterToEncoder, 0)) return p;
    if (edge_idx >= 1 && edge_idx < k)
      if (auto* p = find_icpt(Boundary::FilterToFilter, static_cast<std::uint32_t>(edge_idx - 1)))
        return p;
    return nullptr;
  };

  // The encoder input is fed by two edges (frames and sidecar); it closes
  // once both have drained.
  ByteSink encoder_sink = shared_sink(*ch[1 + k].hub_out, 2);

  // Frame edge e leads from stage e into stage e+1 (stage 0 is the decoder,
  // stages 1..k the filters, stage k+1 the encoder).
  std::vector<std::unique_ptr<detail::Edge>> frame_edges;
  for (std::size_t e = 0; e <= k; ++e) {
    ByteSink target = (e == k) ? encoder_sink : *ch[e + 1].hub_out;
    frame_edges.push_back(std::make_unique<detail::Edge>(std::move(target), frame_edge_icpt(e)));
  }
  detail::Edge segment_edge(*ch[0].hub_out, find_icpt(Boundary::CameraToDecoder, 0));
  detail::Edge sidecar_edge(encoder_sink, find_icpt(Boundary::DecoderToEncoderSidecar, 0));

  // The certificate chain propagates in-band: the decoder opens it and each
  // filter appends itself, so the scheduler never synthesizes certificates.
  // All the hub injects is the camera's signed segment.
  {
    auto framed = frame_object(MsgType::Segment, encode_signed_segment(segment));
    for (std::size_t i = 0; i < framed.size(); ++i)
      segment_edge.send(std::move(framed[i]), i + 1 == framed.size());
    segment_edge.finish();
  }

  // Relay pumps: decoder output splits into the first frame edge and the
  // sidecar edge; each filter output feeds the next frame edge; the encoder
  // output yields the bundle.
  std::optional<FinalBundle> bundle;
  std::mutex result_mu;

  std::vector<std::thread> relays;
  struct RelayJoiner {
    std::vector<std::thread>* ts;
    ~RelayJoiner() {
      for (auto& t : *ts)
        if (t.joinable()) t.join();
    }
  } relay_joiner{&relays};

  relays.emplace_back([&] {
    try {
      while (auto m = wire_decode(*ch[0].hub_in)) {
        bool last = detail::is_final_chunk(*m);
        if (m->msg_type == MsgType::Sidecar) {
          sidecar_edge.send(wire_encode(*m), last);
        } else if (m->msg_type == MsgType::Error) {
          ObjectAssembler a;
          if (auto obj = a.feed(*m)) {
            auto [code, what] = decode_error_payload(obj->second);
            std::lock_guard<std::mutex> lk(result_mu);
            record_error(Error(code, "decoder: " + what));
          }
          frame_edges[0]->send(wire_encode(*m), last);
        } else {
          frame_edges[0]->send(wire_encode(*m), last);
        }
      }
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lk(result_mu);
      record_error(e);
    }
    frame_edges[0]->finish();
    sidecar_edge.finish();
  });

  for (std::size_t i = 0; i < k; ++i) {
    relays.emplace_back([&, i] {
      try {
        while (auto m = wire_decode(*ch[1 + i].hub_in)) {
          if (m->msg_type == MsgType::Error) {
            ObjectAssembler a;
            if (auto obj = a.feed(*m)) {
              auto [code, what] = decode_error_payload(obj->second);
              std::lock_guard<std::mutex> lk(result_mu);
              record_error(Error(code, "filter[" + std::to_string(i) + "]: " + what));
            }
          }
          frame_edges[i + 1]->send(wire_encode(*m), detail::is_final_chunk(*m));
        }
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lk(result_mu);
        record_error(e);
      }
      frame_edges[i + 1]->finish();
    });
  }

  relays.emplace_back([&] {
    ObjectAssembler assembler;
    try {
      while (auto obj = detail::recv_object(*ch[1 + k].hub_in, assembler)) {
        if (obj->first == MsgType::Bundle) {
          FinalBundle b = decode_final_bundle(obj->second);
          std::lock_guard<std::mutex> lk(result_mu);
          bundle = std::move(b);
        } else if (obj->first == MsgType::Error) {
          auto [code, what] = decode_error_payload(obj->second);
          std::lock_guard<std::mutex> lk(result_mu);
          record_error(Error(code, "encoder: " + what));
        }
      }
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lk(result_mu);
      record_error(e);
    }
  });

  for (auto& t : relays)
    if (t.joinable()) t.join();
  for (auto& t : threads)
    if (t.joinable()) t.join();

  if (first_error) {
    // Keep the original code when the failure bubbled through later stages
    // as an "upstream:" echo.
    throw Error(ErrorCode::PipelineRejected, std::string("pipeline rejected: ") +
                                                 first_error->what())
        .with_cause(first_error->code());
  }
  if (!bundle) throw Error(ErrorCode::StageCrashed, "pipeline produced no bundle");
  return std::move(*bundle);
}

inline FinalBundle run_job(const JobSpec& spec, const TrustRoots& trust,
                           const Authority& authority, RunOptions options = {}) {
  SignedSegment segment = decode_segment_file(read_file(spec.input_path));
  FinalBundle bundle =
      run_segment(segment, spec.filter_chain, trust, authority, spec.transport,
                  std::move(options));
  if (!spec.output_path.empty()) write_file(spec.output_path, encode_bundle_file(bundle));
  return bundle;
}

}  // namespace vron
