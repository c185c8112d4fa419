"""Fixed vocabulary for human-readable user ids (adjective-noun-number)."""

ADJECTIVES = (
    "agile", "amber", "ancient", "arid", "bold", "brave", "brisk", "calm",
    "candid", "cedar", "civil", "clever", "coastal", "crisp", "curious",
    "daring", "deep", "dusty", "eager", "early", "earnest", "fabled", "fair",
    "fleet", "fluent", "fond", "frank", "gentle", "gilded", "glad", "grand",
    "hardy", "hazel", "humble", "keen", "kind", "lively", "loyal", "lucid",
    "mellow", "mild", "modest", "noble", "novel", "patient", "placid",
    "plain", "polar", "proud", "quiet", "rapid", "rustic", "sage", "serene",
    "sharp", "silent", "solid", "stable", "steady", "swift", "tidy", "vivid",
    "warm", "wise",
)

NOUNS = (
    "alloy", "anode", "archive", "atlas", "basin", "beacon", "birch",
    "bridge", "canyon", "carbon", "cipher", "cobalt", "comet", "compass",
    "coral", "crater", "current", "delta", "dynamo", "ember", "enzyme",
    "fjord", "flint", "garnet", "geyser", "glacier", "granite", "harbor",
    "helium", "isotope", "jasper", "kernel", "lagoon", "lantern", "ligand",
    "lumen", "magnet", "maple", "marble", "meadow", "mesa", "meteor", "mica",
    "neuron", "nickel", "orbit", "osmium", "oxide", "photon", "pine",
    "prism", "proton", "quartz", "quasar", "reef", "ridge", "river", "sonar",
    "spruce", "summit", "tundra", "vector", "willow", "zephyr",
)
