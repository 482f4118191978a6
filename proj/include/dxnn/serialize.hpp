#pragma once

// Population snapshot format ("dxnn-pop v1"): a version line followed by
// one parenthesized tuple per line, keyword first.
//
//   (population <id> <generation-counter> (<dxnn-id>...))
//   (dxnn <id> <core-id> (<element-id>...))
//   (core <id> (<sensor>...) (<actuator>...) (<param>...) (<subcore-id>...) <gen> (<history>...))
//   (subcore <id> (<input>...) (<output-id>...) (<link>...) (<neuron-id>...) <kind> (<param>...)
//            (<neuron-id>...) <gen>)
//   (neuron <id> (<input>...) (<output-id>...) <af> <lm> ((<w>...)...) <bias|nil> (<param>...) <gen>)
//
// sensor/actuator: (<port-id> <subcore-id> "<tag>" <len>)
// input: (<from-id> <len>)      param: ("<key>" "<value>")
// link: (<to> <from> single <index>) | (<to> <from> block) | (<to> all)
// history: ("<operator>" <element-id> "<info>")
//
// Each genome is written as its dxnn record, core, subcores and neurons in
// id order. Weights use the shortest decimal form that reads back exactly.

#include <string>
#include <string_view>

#include "dxnn/genome.hpp"

namespace dxnn {

inline constexpr std::string_view kSnapshotHeader = "dxnn-pop v1";

std::string serialize(const Population& pop);

/// Throws ParseError (with line) on malformed text and ReferenceError
/// when a record names an element that has no record of its own.
Population deserialize(std::string_view text);

}  // namespace dxnn
