from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from attack_tagger import config
from attack_tagger.errors import EmptySentence

SENTENCE_SLOT = "{input-sentence}"

# Sent as the single user message. Trailing spaces and the double space after "Execution" are part of it.
PROMPT_TEMPLATE = (
    "Look at this cyber-intelligence text and label it with a mitre tag \n"
    "from the selection provided to you in this message.\n"
    "\n"
    "RETURN YOUR RESPONSE IN THE FOLLOWING JSON FORMAT WITHOUT MARKDOWN:\n"
    "{\n"
    '    "Tag": "YOUR MITRE TAG"\n'
    "}\n"
    "\n"
    'IT IS EXTREMELY IMPORTANT THAT YOU RETURN THE EXACT "NAME" VALUE \n'
    "FOR A MAXIMUM REWARD.\n"
    "\n"
    "MITRE_TAGS:\n"
    "    * TA0006 - Credential Access * TA0002 - Execution  * TA0003 - Persistence \n"
    "    * TA0001 - Initial Access * TA0005 - Defense Evasion * TA0007 - Discovery\n"
    "    * TA0008 - Lateral Movement * TA0009 - Collection * TA0010 - Exfiltration\n"
    "    * TA0043 - Reconnaissance * TA0040 - Impact * TA0042 - Resource Development\n"
    "    * TA0011 - Command and Control * TA0004 - Privilege Escalation\n"
    "\n"
    "cyber-intelligence text: \n"
    "{input-sentence} "
)


@dataclass(frozen=True)
class PromptRequest:
    prompt_text: str
    temperature: float = 1.0
    model_name: str = "gpt-4o"
    sentence: str = field(default="", compare=False)

    def messages(self) -> List[Dict[str, Any]]:
        return [{"role": "user", "content": self.prompt_text}]


def build_prompt(
    sentence: str,
    *,
    model_name: Optional[str] = None,
    temperature: Optional[float] = None,
) -> PromptRequest:
    """
    Fill the template's single sentence slot. The sentence is inserted verbatim; braces in it
    are never expanded.
    """
    if not str(sentence or "").strip():
        raise EmptySentence("Cannot build a prompt for an empty sentence")
    return PromptRequest(
        prompt_text=PROMPT_TEMPLATE.replace(SENTENCE_SLOT, sentence, 1),
        temperature=config.llm_temperature() if temperature is None else float(temperature),
        model_name=model_name or config.llm_model_name(),
        sentence=sentence,
    )
