/** The canned analysis queries preloaded in the console's example picker. */

const PROLOGUE = `PREFIX gptkb: <https://gptkb.org/entity/>
PREFIX gptkbp: <https://gptkb.org/prop/>

`;

function frequency(predicate: string): string {
  return (
    PROLOGUE +
    `SELECT ?o (COUNT(*) AS ?ofreq)
WHERE {
  ?s gptkbp:${predicate} ?o.
}
GROUP BY ?o
ORDER BY DESC(?ofreq)
LIMIT 100`
  );
}

export const CANNED_QUERIES: { name: string; text: string }[] = [
  { name: "Most frequent classes", text: frequency("instanceOf") },
  { name: "Nationality distribution", text: frequency("nationality") },
  { name: "Gender distribution", text: frequency("gender") },
  {
    name: "EU citizens",
    text:
      PROLOGUE +
      `SELECT (COUNT(DISTINCT ?person) AS ?count)
WHERE {
  ?person gptkbp:nationality ?citizenship.
  VALUES ?citizenship {
    gptkb:German gptkb:French gptkb:Italian
    gptkb:Spanish gptkb:Austrian gptkb:Belgian
    gptkb:Bulgarian gptkb:Croatian gptkb:Cypriot
    gptkb:Czech gptkb:Danish gptkb:Dutch
    gptkb:Estonian gptkb:Finnish gptkb:Greek
    gptkb:Hungarian gptkb:Irish gptkb:Latvian
    gptkb:Lithuanian gptkb:Luxembourgish gptkb:Maltese
    gptkb:Polish gptkb:Portuguese gptkb:Romanian
    gptkb:Slovak gptkb:Slovene gptkb:Swedish
  }
}`,
  },
  {
    name: "Spouse symmetry",
    text:
      PROLOGUE +
      `SELECT (COUNT(?a_both) AS ?numMutual) (COUNT(?a) AS ?total) ((COUNT(?a_both) * 1.0) / COUNT(?a) AS ?fraction)
WHERE {
  {
    SELECT DISTINCT ?a ?b
    WHERE {
      ?a gptkbp:spouse ?b.
    }
  }
  OPTIONAL {
    ?b gptkbp:spouse ?a. BIND(?a AS ?a_both)
  }
}`,
  },
];
