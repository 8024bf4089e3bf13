#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dtzo/runtime.hpp"
#include "dtzo/wire.hpp"

using namespace dtzo;

TEST_CASE("frame layout constants") {
  CHECK(wire::frame_size(0) == 13);
  CHECK(wire::frame_size(6) == 13 + 48);
}

TEST_CASE("frames round-trip bit exactly") {
  Vec payload{1.5, -2.25, 0.0, 1e-300, -1e300};
  std::vector<std::uint8_t> buf =
      wire::encode_frame(wire::tag_worker_update, payload);
  CHECK(buf.size() == wire::frame_size(payload.size()));
  wire::Frame f = wire::decode_frame(buf);
  CHECK(f.tag == wire::tag_worker_update);
  CHECK(f.payload == payload);
}

TEST_CASE("empty payload round-trips") {
  std::vector<std::uint8_t> buf = wire::encode_frame(wire::tag_shutdown, {});
  wire::Frame f = wire::decode_frame(buf);
  CHECK(f.tag == wire::tag_shutdown);
  CHECK(f.payload.empty());
}

TEST_CASE("decoder rejects malformed frames") {
  std::vector<std::uint8_t> buf =
      wire::encode_frame(wire::tag_master_broadcast, {1.0, 2.0});

  SUBCASE("truncated input") {
    buf.resize(buf.size() - 1);
    CHECK_THROWS(wire::decode_frame(buf));
    CHECK_THROWS(wire::decode_frame(buf.data(), 3));
  }
  SUBCASE("bad magic") {
    buf[0] = 'X';
    CHECK_THROWS(wire::decode_frame(buf));
  }
  SUBCASE("unknown tag") {
    buf[4] = 99;
    CHECK_THROWS(wire::decode_frame(buf));
  }
  SUBCASE("payload corruption fails the checksum") {
    buf[9] ^= 0x40;
    CHECK_THROWS(wire::decode_frame(buf));
  }
  SUBCASE("checksum corruption") {
    buf.back() ^= 0x01;
    CHECK_THROWS(wire::decode_frame(buf));
  }
}

TEST_CASE("message scalar counts match the ledger contract") {
  WorkerUpdate wu{0, Vec(3, 1.0), Vec(2, 2.0), Vec(1, 3.0)};
  CHECK(scalar_count(Message{wu}) == 6);  // d1 + d2 + d3

  MasterBroadcast mb{Vec(3, 0.0), Vec(2, 0.0), Vec(1, 0.0), Vec(2, 0.0),
                     Vec(1, 0.0)};
  CHECK(scalar_count(Message{mb}) == 9);  // d1 + 2 d2 + 2 d3

  CHECK(scalar_count(Message{PhiRoundUp{1, Vec(1, 0.0)}}) == 1);
  CHECK(scalar_count(Message{PhiRoundDown{Vec(2, 0.0)}}) == 2);
  CHECK(scalar_count(Message{Shutdown{}}) == 0);

  CHECK(tag_of(Message{wu}) == wire::tag_worker_update);
  CHECK(tag_of(Message{mb}) == wire::tag_master_broadcast);
  CHECK(tag_of(Message{Shutdown{}}) == wire::tag_shutdown);
}

TEST_CASE("messages survive the wire round-trip") {
  Dims dims{2, 2, 1, 3};
  WorkerUpdate wu{2, {0.5, -0.5}, {1.0, 2.0}, {3.0}};
  wire::Frame f = wire::decode_frame(encode_message(Message{wu}));
  Message back = decode_message(dims, f, 2);
  const auto& wu2 = std::get<WorkerUpdate>(back);
  CHECK(wu2.j == 2);
  CHECK(wu2.x1 == wu.x1);
  CHECK(wu2.x2 == wu.x2);
  CHECK(wu2.x3 == wu.x3);

  MasterBroadcast mb{{0.1, 0.2}, {0.3, 0.4}, {0.5}, {0.6, 0.7}, {0.8}};
  wire::Frame fm = wire::decode_frame(encode_message(Message{mb}));
  Message mback = decode_message(dims, fm, -1);
  const auto& mb2 = std::get<MasterBroadcast>(mback);
  CHECK(mb2.z1 == mb.z1);
  CHECK(mb2.z2 == mb.z2);
  CHECK(mb2.z3 == mb.z3);
  CHECK(mb2.grad_o_x2 == mb.grad_o_x2);
  CHECK(mb2.grad_o_x3 == mb.grad_o_x3);

  PhiRoundUp pu{1, {9.0, -9.0}};
  wire::Frame fp = wire::decode_frame(encode_message(Message{pu}));
  Message pback = decode_message(dims, fp, 1);
  const auto& pu2 = std::get<PhiRoundUp>(pback);
  CHECK(pu2.j == 1);
  CHECK(pu2.block == pu.block);
}

TEST_CASE("decoding a worker frame with a wrong payload length fails") {
  Dims dims{3, 2, 1, 1};
  wire::Frame f;
  f.tag = wire::tag_worker_update;
  f.payload = Vec(4, 0.0);  // should be 6
  CHECK_THROWS(decode_message(dims, f, 0));
}

TEST_CASE("local transport delivers in order and fills the ledger") {
  LocalTransport tp(2);
  tp.send_up(0, Message{WorkerUpdate{0, Vec(3, 0.0), Vec(2, 0.0), Vec(1, 0.0)}},
             CommPhase::iteration);
  tp.send_up(0, Message{PhiRoundUp{0, Vec(1, 5.0)}}, CommPhase::cut_update);
  tp.send_down(1,
               Message{MasterBroadcast{Vec(3, 0.0), Vec(2, 0.0), Vec(1, 0.0),
                                       Vec(2, 0.0), Vec(1, 0.0)}},
               CommPhase::iteration);

  const CommLedger& led = tp.ledger();
  CHECK(led.up_scalars == 7);
  CHECK(led.down_scalars == 9);
  CHECK(led.iter_up == 6);
  CHECK(led.cut_up == 1);
  CHECK(led.iter_down == 9);
  CHECK(led.cut_down == 0);

  Message m1 = tp.recv_up(0);
  CHECK(std::holds_alternative<WorkerUpdate>(m1));
  Message m2 = tp.recv_up(0);
  CHECK(std::get<PhiRoundUp>(m2).block == Vec{5.0});
  CHECK(std::holds_alternative<MasterBroadcast>(tp.recv_down(1)));

  CHECK_THROWS(tp.recv_up(0));  // empty queue
  tp.close();
  CHECK_THROWS(tp.send_up(0, Message{Shutdown{}}, CommPhase::iteration));
}
