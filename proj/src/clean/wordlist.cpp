#include <string>
#include <unordered_set>

#include "pint/clean.hpp"

namespace pint::clean {

namespace {

// Frequent English words. Inflected forms are handled by suffix stripping
// in in_wordlist(), so mostly base forms appear here.
constexpr std::string_view kWords = R"(
a about above across act action actually add after again against age ago agree air all allow almost
alone along already also although always am among amount an analysis and animal another answer any
anyone anything appear apply approach are area argue arm around art as ask at attention authority available
away back bad base be beautiful because become bed been before begin behavior behind being believe
benefit best better between beyond big bill bit black blood blue board body book born both box boy break
bring brother build building business but buy by call calendar came camera can cancer capital car card
care carry case catch cause cell center central century certain certainly chair challenge chance change
character charge check child choice choose church citizen city civil claim class clear clearly close
coach cold collection college color come common community company compare computer concept concern condition
conference congress consider consumer contain continue control cost could country county couple course
court cover create crime cultural culture cup current customer cut dark data daughter day dead deal death
debate decade decide decision deep defense degree democrat depend describe design despite detail determine
develop development did die difference different difficult dinner direction director discover discovery discuss discussion
disease do doctor does dog done door down draw dream drive drop drug during each early earth east easy eat
economic economy edge education effect effort eight either election else employee end energy enjoy
enough enter entire environment environmental equal especially establish even evening event ever every
everybody everyone everything evidence exactly example executive exist expect experience experiment expert explain eye face fact
factor fail fall family far fast father fear federal feel feeling few field fight figure fill film final
finally financial find fine finger finish fire firm first fish five floor fly focus follow food foot for
force foreign forget form former forward four free friend from front full fund future game garden gas
general generation get girl give glass go goal good government great green ground group grow growth
guess gun guy had hair half hand hang happen happy hard has have he head health hear heart heat heavy
help her here herself high him himself his history hit hold home hope hospital hot hotel hour house how
however huge human hundred husband i idea identify if image imagine impact important improve in include
including increase indeed indicate individual industry information inside instead institution interest
interesting international interview into investment involve is issue it item its itself job join just
keep key kid kill kind kitchen know knowledge land language large last late later laugh law lawyer lay
lead leader learn least leave left leg legal less let letter level lie life light like likely line list
listen little live local long look lose loss lot love low machine magazine main maintain major majority
make man manage management manager many market marriage material matter may maybe me mean measure measurement media
medical meet meeting member memory mention message method middle might military million mind minute miss
mission model modern moment money month moon more morning most mother mouth move movement movie mr mrs much
music must my myself name nation national natural nature near nearly necessary need network never new
news newspaper next nice night no none nor north not note nothing notice now number occur of off offer
office officer official often oh oil ok old on once one only onto open operation opportunity option or
order organization other others our out outside over own owner page pain painting paper parent part
participant particular particularly partner party pass past patient pattern pay peace people per perform
performance perhaps period person personal phone physical pick picture piece place plan plant play player
point police policy political politics poor popular population position positive possible power practice
prepare present president pressure pretty prevent price print private probably problem process produce product
production professional professor program project property protect prove provide public pull purpose push
put quality question quickly quite race radio raise range rate rather reach read ready real reality
realize really reason receive recent recently recognize record red reduce reflect region relate
relationship religious remain remember remove report represent republican require research resource
respond response responsibility rest result return reveal rich right rise risk road rock role room rule
run safe same save say scene school science scientific scientist score sea season seat second section security see seek seem
sell send senior sense series serious serve service set seven several sex sexual shake share she shoot
short shot should shoulder show side sign significant similar simple simply since sing single sister sit
site situation six size skill skin small smile so social society soldier some somebody someone something
sometimes son song soon sort sound source south southern space speak special specific speech spend sport
spring staff stage stand standard star start state statement station stay step still stock stop store
story strategy street strong structure student study stuff style subject success successful such suddenly
suffer suggest summer sun support sure surface system table take talk task tax teach teacher team technology
television tell temperature ten tend term test than thank that the their them themselves then theory there these they
thing think third this those though thought thousand threat three through throughout throw thus time to
today together tonight too top total tough toward town trade traditional training travel treat treatment
tree trial trip trouble true truth try turn tv two type under understand unit until up upon us use usually
value various very victim view violence visit voice vote wait walk wall want war watch water way we
weapon wear week weight well west western what whatever when where whether which while white who whole
whom whose why wide wife will win wind window wish with within without woman wonder word work worker world
worry would write writer wrong yard yeah year yes yet you young your yourself
able above absolute accept according account accurate achieve acid active activity actual added
addition additional address adult advance advantage affect afternoon agency agent agreement ahead aim
alive amazing ancient anger angle annual apart apparent appearance application appropriate argument
army arrive article artist aspect assume atmosphere attack attempt attend attitude audience author
average avoid aware balance ball band bank bar basic basis battle bear beat beginning belief below
bird birth blow boat bone border bottom brain branch bread bridge brief bright broad brown budget
burn button calculate camp campaign capacity captain careful category cause chain chapter chemical chief
circle clean climate clock cloud coast code coffee collect combine comfortable command comment commercial
commission communication compete competition complete complex component concentrate conclusion conduct confidence
conflict connect connection consequence constant construction contact content context contract contrast
contribute conversation copy corner correct count crowd culture currency curve cycle damage dance date
dear define definition degree deliver demand department depth desire destroy device diet dig dimension
direct disappear distance distribute divide document double doubt dress drink due duty eastern edition
effective efficient egg element eliminate emerge emotion emphasis employ empty enable encourage enemy
engine engineer equipment error escape essay essential estimate ethnic evaluate exact examine excellent
exchange exercise expand expense explore express extend extent external extreme fair faith familiar famous
farm farmer fashion fat fault favor feature fee female fiction file flat flight flow flower force
formal formula fortune foundation frame frequent fresh fruit fuel function fundamental gain gate gather
gender gene generate gift global god gold golf grade grand grant grass gray guard guide habit handle
happiness harm hat hate hero hide highway hill hire hole holiday honor horse host household hunt ice
ideal illness immediate income independent index influence initial injury inner input instance
instruction instrument intelligence intend intention internal introduce invest investigate island
journal journey judge judgment justice kill king lack lake large laser layer leaf league lean lesson
library lift limit link liquid literature loan location logic logical lord lower luck lunch male map mark
mass master match math maximum meal meaning meat mechanism medium mental metal middle mile milk minimum
minor mirror mix mode moral motion motor mountain mount multiple museum mystery narrow native negative
neighbor nerve neutral noise normal northern novel nurse object objective obvious ocean odd ok
online opinion opposite orange origin original otherwise outcome output overall pack pair panel parameter
park path peak percent perfect permanent permit philosophy phrase physics pilot pink pitch plate plenty
pocket poem poet poetry pool port portion possess potential pound powerful practical prayer precise
predict preference premise presence press primary prime prince principle prior priority prison prize
procedure profit progress promise proof proper proportion proposal prospect protein proud psychology
pure quarter queen quick quote rain random rare raw react reader reduce reference reform refuse regard
regular reject release relevant relief religion rely remote rent repeat replace request resist resolve
respect restaurant restore retain revenue review revolution reward rice ride ring river root rough round
route routine row royal rural sale salt sample scale schedule scheme scholar screen search secret sector
select self sentence separate sequence session setting settle shape sharp sheet shift ship shirt shop
sight signal silence silver sky sleep slide slow smart smoke snow soft software soil solar solid
solution solve soul southern spare species speed spirit split spot spread square stable standard
statistic status steal steel stone strange stream strength stress stretch strike string stroke student
studio subject submit substance suit sum supply surgery survey survive sweet symbol sympathy tale tall
target taste teaching tear technique telephone temple tension text theme therefore thick thin threat
tie tiny tip title tone tool tooth topic touch tour track trail train transfer transform transport trend
trust truth tube twice typical uncle union unique universe university unless unlike unusual upper urban
user valley variable variety vehicle version vessel village virus visible vision visual volume wage
warm wash waste wave wealth weather wedding weekend welcome wheel whereas wild wing winter wire wise
witness wood wooden worth yellow youth zone
)";

const std::unordered_set<std::string>& words() {
  static const std::unordered_set<std::string> set = [] {
    std::unordered_set<std::string> s;
    std::size_t pos = 0;
    while (pos < kWords.size()) {
      auto start = kWords.find_first_not_of(" \n", pos);
      if (start == std::string_view::npos) break;
      auto end = kWords.find_first_of(" \n", start);
      if (end == std::string_view::npos) end = kWords.size();
      s.emplace(kWords.substr(start, end - start));
      pos = end;
    }
    return s;
  }();
  return set;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

bool in_wordlist(std::string_view w) {
  const auto& set = words();
  if (set.count(std::string(w))) return true;
  // Light suffix stripping: plural, past, gerund, adverb, comparative, possessive.
  static constexpr std::string_view kSuffixes[] = {"'s", "s", "es", "ed", "d", "ing", "ly", "er", "est", "ies"};
  for (auto suffix : kSuffixes) {
    if (!ends_with(w, suffix)) continue;
    std::string stem(w.substr(0, w.size() - suffix.size()));
    if (set.count(stem)) return true;
    if (suffix == "ies" && set.count(stem + "y")) return true;
    if ((suffix == "ing" || suffix == "ed") && set.count(stem + "e")) return true;
    if ((suffix == "ing" || suffix == "ed") && stem.size() > 2 && stem.back() == stem[stem.size() - 2] &&
        set.count(stem.substr(0, stem.size() - 1)))
      return true;
  }
  return false;
}

}  // namespace pint::clean
