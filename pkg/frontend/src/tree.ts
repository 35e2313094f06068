/**
 * Explanation tree view state: expand/collapse per node with the current
 * selection preserved across toggles.
 */
import { Explanation, Premise } from "./schemas";

export interface TreeRow {
  key: string;
  depth: number;
  label: string;
  kind: "derived" | "input" | "fact" | "rule";
  note: string | null;
  expandable: boolean;
  expanded: boolean;
}

export class ExplanationTree {
  private collapsed = new Set<string>();
  selectedKey: string | null = null;

  constructor(readonly explanation: Explanation) {}

  toggle(key: string): void {
    if (this.collapsed.has(key)) {
      this.collapsed.delete(key);
    } else {
      this.collapsed.add(key);
    }
  }

  select(key: string | null): void {
    this.selectedKey = key;
  }

  isExpanded(key: string): boolean {
    return !this.collapsed.has(key);
  }

  /** Flatten the graph into visible rows, depth-first from the roots. */
  rows(): TreeRow[] {
    const out: TreeRow[] = [];
    const roots = Object.keys(this.explanation.roots).sort();
    for (const root of roots) {
      this.walkNode(this.explanation.roots[root]!, `${root}`, 0, out);
    }
    return out;
  }

  private walkNode(nodeId: string, key: string, depth: number, out: TreeRow[]): void {
    const node = this.explanation.nodes[nodeId];
    if (!node) return;
    const expandable = node.justifications.length > 0;
    const expanded = expandable && this.isExpanded(key);
    out.push({
      key,
      depth,
      label: `${node.symbol} = ${node.value}`,
      kind: "derived",
      note: null,
      expandable,
      expanded,
    });
    if (!expanded) return;
    const primary = node.justifications[0];
    if (!primary) return;
    out.push({
      key: `${key}/rule`,
      depth: depth + 1,
      label: primary.rule,
      kind: "rule",
      note: null,
      expandable: false,
      expanded: false,
    });
    primary.premises.forEach((premise, index) => {
      this.walkPremise(premise, `${key}/p${index}`, depth + 1, out);
    });
  }

  private walkPremise(premise: Premise, key: string, depth: number, out: TreeRow[]): void {
    if (premise.kind === "derived") {
      this.walkNode(premise.node, key, depth, out);
      return;
    }
    const args = premise.args.length ? `(${premise.args.join(", ")})` : "";
    const value = premise.value === null ? "" : ` = ${premise.value}`;
    out.push({
      key,
      depth,
      label: `${premise.symbol}${args}${value}`,
      kind: premise.kind,
      note: premise.note ?? null,
      expandable: false,
      expanded: false,
    });
  }
}
