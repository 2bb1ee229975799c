use serde::{Deserialize, Serialize};

use super::Language;

/// Surface material for every sentence frame the grammar produces.
///
/// Defaults exist per language; a lexicon file may override any subset of
/// fields in its `[templates]` table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Templates {
    pub has_visited: String,
    /// Verb form after a coordinated (plural) subject.
    pub have_visited: String,
    pub did_not_visit: String,
    pub taller: String,
    pub as_tall: String,
    pub everyone: String,
    pub someone: String,
    pub nobody: String,
    pub every_place: String,
    pub everyone_object: String,
    pub some_place: String,
    pub someone_object: String,
    pub the_person_that: String,
    pub only: String,
    pub place: String,
    pub places: String,
    pub person: String,
    pub people: String,
    /// Number words for 1..=30 counting places.
    pub numbers_place: Vec<String>,
    /// Number words for 1..=30 counting people.
    pub numbers_person: Vec<String>,
    pub list_conjunction: String,
    /// Comma before the conjunction in lists of three or more.
    pub serial_comma: bool,
    pub sentence_separator: String,
    pub terminator: String,
}

const EN_NUMBERS: [&str; 30] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
    "eighteen", "nineteen", "twenty", "twenty-one", "twenty-two", "twenty-three",
    "twenty-four", "twenty-five", "twenty-six", "twenty-seven", "twenty-eight",
    "twenty-nine", "thirty",
];

const PT_NUMBERS_MASC: [&str; 30] = [
    "um", "dois", "três", "quatro", "cinco", "seis", "sete", "oito", "nove", "dez",
    "onze", "doze", "treze", "catorze", "quinze", "dezesseis", "dezessete", "dezoito",
    "dezenove", "vinte", "vinte e um", "vinte e dois", "vinte e três", "vinte e quatro",
    "vinte e cinco", "vinte e seis", "vinte e sete", "vinte e oito", "vinte e nove",
    "trinta",
];

fn words(ws: &[&str]) -> Vec<String> {
    ws.iter().map(|w| w.to_string()).collect()
}

impl Templates {
    pub fn defaults(language: Language) -> Templates {
        match language {
            Language::English => Templates {
                has_visited: "has visited".into(),
                have_visited: "have visited".into(),
                did_not_visit: "didn't visit".into(),
                taller: "is taller than".into(),
                as_tall: "is as tall as".into(),
                everyone: "Everyone".into(),
                someone: "Someone".into(),
                nobody: "Nobody".into(),
                every_place: "every place".into(),
                everyone_object: "everyone".into(),
                some_place: "some place".into(),
                someone_object: "someone".into(),
                the_person_that: "is the person that".into(),
                only: "only".into(),
                place: "place".into(),
                places: "places".into(),
                person: "person".into(),
                people: "people".into(),
                numbers_place: words(&EN_NUMBERS),
                numbers_person: words(&EN_NUMBERS),
                list_conjunction: "and".into(),
                serial_comma: true,
                sentence_separator: ", ".into(),
                terminator: String::new(),
            },
            Language::Portuguese => {
                // "pessoa" is feminine, so person counts take um/uma, dois/duas
                let fem: Vec<String> = PT_NUMBERS_MASC
                    .iter()
                    .map(|w| w.replace("um", "uma").replace("dois", "duas"))
                    .collect();
                Templates {
                    has_visited: "visitou".into(),
                    have_visited: "visitaram".into(),
                    did_not_visit: "não visitou".into(),
                    taller: "é mais alto que".into(),
                    as_tall: "é tão alto quanto".into(),
                    everyone: "Todo mundo".into(),
                    someone: "Alguém".into(),
                    nobody: "Ninguém".into(),
                    every_place: "todo lugar".into(),
                    everyone_object: "todo mundo".into(),
                    some_place: "algum lugar".into(),
                    someone_object: "alguém".into(),
                    the_person_that: "é a pessoa que".into(),
                    only: "apenas".into(),
                    place: "lugar".into(),
                    places: "lugares".into(),
                    person: "pessoa".into(),
                    people: "pessoas".into(),
                    numbers_place: words(&PT_NUMBERS_MASC),
                    numbers_person: fem,
                    list_conjunction: "e".into(),
                    serial_comma: false,
                    sentence_separator: ", ".into(),
                    terminator: String::new(),
                }
            }
        }
    }

    /// Premise sentences joined with periods instead of commas.
    pub fn period_joined(mut self) -> Templates {
        self.sentence_separator = ". ".into();
        self.terminator = ".".into();
        self
    }

    pub(crate) fn all_text(&self) -> Vec<&str> {
        let mut out = vec![
            self.has_visited.as_str(),
            &self.have_visited,
            &self.did_not_visit,
            &self.taller,
            &self.as_tall,
            &self.everyone,
            &self.someone,
            &self.nobody,
            &self.every_place,
            &self.everyone_object,
            &self.some_place,
            &self.someone_object,
            &self.the_person_that,
            &self.only,
            &self.place,
            &self.places,
            &self.person,
            &self.people,
            &self.list_conjunction,
        ];
        out.extend(self.numbers_place.iter().map(String::as_str));
        out.extend(self.numbers_person.iter().map(String::as_str));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portuguese_person_numbers_agree_in_gender() {
        let t = Templates::defaults(Language::Portuguese);
        assert_eq!(t.numbers_person[0], "uma");
        assert_eq!(t.numbers_person[1], "duas");
        assert_eq!(t.numbers_person[20], "vinte e uma");
        assert_eq!(t.numbers_person[21], "vinte e duas");
        assert_eq!(t.numbers_place[21], "vinte e dois");
        assert_eq!(t.numbers_person[29], "trinta");
    }
}
