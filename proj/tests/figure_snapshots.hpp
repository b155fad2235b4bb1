#pragma once

#include <string>
#include <vector>

#include "eae/prompting.hpp"
#include "fixtures.hpp"

namespace eae::testing {

// Expected prompt text for every variant on the two-event fixture document.
struct PromptSnapshot {
  PromptVariant variant;
  std::size_t event;
  std::string role;
  TriggerMarking marking;
  std::string expected;
};

inline const std::vector<PromptSnapshot>& figure_snapshots() {
  static const std::vector<PromptSnapshot> kSnapshots = {
      {PromptVariant::kRole, 1, "victim", TriggerMarking::kMarkers, "What is the victim in the event?"},
      {PromptVariant::kRole, 0, "transporter", TriggerMarking::kInPrompt,
       "What is the transporter in the event triggered by 'transported'?"},
      {PromptVariant::kMRole, 0, "transporter", TriggerMarking::kMarkers,
       "What is the transporter in the event? transporter is [none]; passenger is [none]; origin is [none]"},
      {PromptVariant::kMRoleCeiling, 0, "transporter", TriggerMarking::kMarkers,
       "What is the transporter in the event? transporter is [none]; passenger is Gretta; origin is Lebanon"},
      {PromptVariant::kMEvent, 1, "victim", TriggerMarking::kMarkers,
       "What is the victim in the event triggered by 'killed'? "
       "transport.person triggered by 'transported': transporter is [none]; passenger is [none]; "
       "origin is [none] | death.caused.by.violent.events triggered by 'killed': killer is [none]; "
       "victim is [none]; place is [none]"},
      {PromptVariant::kMEventCeiling, 1, "victim", TriggerMarking::kMarkers,
       "What is the victim in the event triggered by 'killed'? "
       "transport.person triggered by 'transported': transporter is the militia; passenger is Gretta; "
       "origin is Lebanon | death.caused.by.violent.events triggered by 'killed': killer is Hezbollah "
       "fighters; victim is [none]; place is Beirut"},
      {PromptVariant::kPromptTesting, 1, "victim", TriggerMarking::kMarkers,
       "What is the victim in the event? The victim is Hassan Nasrallah."},
  };
  return kSnapshots;
}

inline std::string render_figure(const PromptSnapshot& s) {
  const auto doc = figure_doc();
  const auto events = figure_events();
  PromptRequest req{&doc, &events, s.event, s.role, s.variant, s.marking, nullptr};
  return build_prompt(req, figure_ontology()).text;
}

}  // namespace eae::testing
