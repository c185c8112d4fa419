"use strict";(()=>{function L(s=window.location.search){return new URLSearchParams(s).get("token")}async function h(s,t,e,n){let i=await fetch(`${t}?token=${encodeURIComponent(e)}`,{method:s,headers:n!==void 0?{"Content-Type":"application/json"}:void 0,body:n!==void 0?JSON.stringify(n):void 0});if(!i.ok){let o=await i.text();throw new Error(`${s} ${t} failed (${i.status}): ${o}`)}return await i.json()}var v=class{constructor(t){this.token=t}session(){return h("GET","/api/session",this.token)}nextItem(){return h("GET","/api/next",this.token)}submit(t){return h("POST","/api/submit",this.token,t)}dashboard(){return h("GET","/api/dashboard",this.token)}revealResults(){return h("POST","/api/results",this.token,{})}redistribute(t,e,n){return h("POST","/api/redistribute",this.token,{from_user:t,to_user:e,documents:n})}exportUrl(){return`/api/export?token=${encodeURIComponent(this.token)}`}};function w(s,t,e,n=.12){if(s<=0||t<=0)return[0,0];let i=Math.max(0,Math.min(e/s,1)),o=Math.round(i*(t-1)),r=Math.max(1,Math.round(n*t/2));return[Math.max(0,o-r),Math.min(t-1,o+r)]}function g(s){return Array.from(s)}function A(s){return g(s).length}var m=s=>/\s/.test(s);function _(s,t){let e=g(s);if(e.length===0)return[0,0];let n=Math.max(0,Math.min(t,e.length-1));if(m(e[n])){let r=n;for(;r<e.length&&m(e[r]);)r++;let l=n;for(;l>=0&&m(e[l]);)l--;if(n=r<e.length?r:l,n<0)return[0,e.length-1]}let i=n;for(;i>0&&!m(e[i-1]);)i--;let o=n;for(;o<e.length-1&&!m(e[o+1]);)o++;return[i,o]}function P(s,t,e,n){let i=Math.min(t,e),o=Math.max(t,e);if(n==="character")return{start_i:i,end_i:o};let[r]=_(s,i),[,l]=_(s,o);return{start_i:r,end_i:l}}var b=class{constructor(t,e="word",n=[]){this.text=t;this.granularity=e;this.spans=[];this.events=[];this.anchor=null;this.spans=n.map(i=>({...i,origin:i.origin??"prefilled"}))}get pendingAnchor(){return this.anchor}emit(t,e){this.events.push({kind:t,payload:e})}spanAt(t){return this.spans.findIndex(e=>e.start_i<=t&&t<=e.end_i)}click(t,e="minor"){let n=A(this.text)-1;if(t=Math.max(0,Math.min(t,n)),this.anchor===null)return this.anchor=t,null;let{start_i:i,end_i:o}=P(this.text,this.anchor,t,this.granularity);this.anchor=null;let r={start_i:i,end_i:o,severity:e,origin:"human"};return this.spans.push(r),this.emit("span_create",{start_i:i,end_i:o,severity:e,origin:"human"}),r}cancelPending(){this.anchor=null}cycle(t){let e=this.spans[t];e&&(e.severity==="minor"?this.setSeverity(t,"major"):this.remove(t))}setSeverity(t,e){let n=this.spans[t];!n||n.severity===e||(n.severity=e,n.origin==="prefilled"&&(n.origin="prefilled-edited"),this.emit("severity_change",{start_i:n.start_i,end_i:n.end_i,severity:e,origin:n.origin}))}setCategory(t,e){let n=this.spans[t];n&&(n.category=e,n.origin==="prefilled"&&(n.origin="prefilled-edited"))}remove(t){let e=this.spans[t];e&&(this.spans.splice(t,1),this.emit("span_delete",{start_i:e.start_i,end_i:e.end_i,severity:e.severity,origin:e.origin}))}},k={human:"span-human",prefilled:"span-prefilled","prefilled-edited":"span-prefilled-edited"};var E=["Accuracy/Mistranslation","Accuracy/Omission","Accuracy/Addition","Accuracy/Overtranslated","Accuracy/Undertranslated","Fluency/Grammar","Fluency/Spelling","Fluency/Punctuation","Fluency/Inconsistency","Terminology","Style/Awkward","Locale/Format","Other"];function a(s,t,e){let n=document.createElement(s);return t&&(n.className=t),e!==void 0&&(n.textContent=e),n}function S(s){if(s.kind==="audio"){let e=a("audio");return e.setAttribute("controls",""),e.setAttribute("src",s.value),e}if(s.kind==="video"){let e=a("video");return e.setAttribute("controls",""),e.setAttribute("src",s.value),e}let t=a("div","html-content");return t.innerHTML=s.value,t}var T=class{constructor(t,e,n,i){this.root=t;this.payload=e;this.onSubmit=n;this.onAccepted=i;this.events=[];this.granularity="word";this.alignmentOn=!0;this.outputs=[];this.comment="";this.skipRequested=!1;this.epoch=Date.now();this.warningsEl=a("div","tutorial-banner hidden"),this.render()}now(){return Date.now()-this.epoch}record(t,e,n,i={}){this.events.push({ts:this.now(),segment:e,model:n,kind:t,payload:i})}render(){let t=this.payload;this.root.textContent="";let e=a("div","annotation-screen"),n=a("div","screen-header");n.appendChild(a("div","progress",`Document ${t.progress.done+1} of ${t.progress.total}`)),t.instructions&&n.appendChild(a("div","instructions",t.instructions)),t.flags.granularity_toggle&&n.appendChild(this.renderGranularityToggle()),t.flags.alignment_hover&&n.appendChild(this.renderAlignmentToggle()),e.appendChild(n),e.appendChild(this.warningsEl),t.segments.forEach((r,l)=>e.appendChild(this.renderSegment(l)));let i=a("textarea","comment-box");i.placeholder="Comments or issues with this document (optional)",i.addEventListener("change",()=>{this.comment=i.value,this.record("comment_set",null,null,{length:i.value.length})}),e.appendChild(i);let o=a("button","submit-button","Submit document");o.addEventListener("click",()=>void this.submit()),e.appendChild(o),this.root.appendChild(e)}renderGranularityToggle(){let t=a("label","granularity-toggle","Span granularity: "),e=a("select");for(let n of["word","character"]){let i=a("option",void 0,n);i.value=n,e.appendChild(i)}return e.value=this.granularity,e.addEventListener("change",()=>{this.granularity=e.value;for(let n of this.outputs)n.tracker&&(n.tracker.granularity=this.granularity)}),t.appendChild(e),t}renderAlignmentToggle(){let t=a("label","alignment-toggle","Alignment hover "),e=a("input");return e.type="checkbox",e.checked=this.alignmentOn,e.addEventListener("change",()=>{this.alignmentOn=e.checked}),t.appendChild(e),t}renderSegment(t){let e=this.payload.segments[t],n=a("div","segment");n.dataset.segment=String(t);let i=a("div","source-block");if(i.appendChild(a("div","block-label","Source")),i.appendChild(this.renderSource(e.src,t)),n.appendChild(i),e.ref){let r=a("div","reference-block");r.appendChild(a("div","block-label","Reference")),r.appendChild(e.ref.kind==="text"?a("div","plain-text",e.ref.value):S(e.ref)),n.appendChild(r)}let o=a("div",this.payload.flags.contrastive?"outputs contrastive":"outputs");for(let r of this.payload.aliases)o.appendChild(this.renderOutput(t,r));return n.appendChild(o),n}renderSource(t,e){if(t.kind!=="text")return S(t);let n=a("div","text source-text"),i=g(t.value);return i.forEach((o,r)=>{let l=a("span","cp",o);l.dataset.i=String(r),this.payload.flags.alignment_hover&&(l.addEventListener("mouseenter",()=>this.hoverAlign(e,r,i.length,!0)),l.addEventListener("mouseleave",()=>this.hoverAlign(e,r,i.length,!1))),n.appendChild(l)}),n}hoverAlign(t,e,n,i){if(this.alignmentOn)for(let o of this.outputs){if(o.segment!==t||!o.textEl)continue;let r=o.textEl.querySelectorAll(".cp");if(!i){r.forEach(c=>c.classList.remove("align-hint"));continue}let[l,p]=w(n,r.length,e);r.forEach((c,u)=>c.classList.toggle("align-hint",u>=l&&u<=p))}}renderOutput(t,e){let i=this.payload.segments[t].outputs[e],o=this.payload.protocol!=="DA"&&i.kind==="text",r={alias:e,segment:t,tracker:o?new b(i.value,this.granularity,i.prefilled_spans??[]):null,score:50,scoreTouched:!1,missing:!1,postedit:null,textEl:null,spanListEl:null};this.outputs.push(r);let l=a("div","output-block");if(l.dataset.alias=e,l.dataset.segment=String(t),l.appendChild(a("div","block-label",`Output ${e.replace("sys","")}`)),i.kind!=="text")l.appendChild(S(i));else if(!r.tracker)l.appendChild(a("div","plain-text",i.value));else{let p=a("div","text output-text");r.textEl=p,g(i.value).forEach((f,M)=>{let C=a("span","cp",f);C.dataset.i=String(M),C.addEventListener("click",()=>this.clickOutput(r,M)),p.appendChild(C)});let c=a("span","missing-chip","[missing]");c.setAttribute("role","button"),c.title="Mark content omitted at the end of this segment",c.addEventListener("click",()=>{r.missing=!r.missing,c.classList.toggle("active",r.missing),this.record(r.missing?"span_create":"span_delete",t,e,{missing:!0})}),p.appendChild(c),l.appendChild(p);let u=a("ul","span-list");r.spanListEl=u,l.appendChild(u),this.paintSpans(r)}if(this.payload.flags.postedit&&i.kind==="text"){let p=a("textarea","postedit-box");p.value=i.value,p.addEventListener("change",()=>{r.postedit=p.value}),l.appendChild(p)}return l.appendChild(this.renderSliders(r)),l}renderSliders(t){let e=a("div","sliders");for(let n of this.payload.sliders){let i=a("label","slider-label",`${n.name}: `),o=a("span","slider-value","50"),r=a("input","score-slider");r.type="range",r.min="0",r.max="100",r.value="50",r.addEventListener("input",()=>{t.score=Number(r.value),t.scoreTouched=!0,o.textContent=r.value,this.record("score_set",t.segment,t.alias,{score:t.score})}),i.appendChild(r),i.appendChild(o),e.appendChild(i);let l=a("div","anchors");for(let p of n.anchors)l.appendChild(a("span","anchor",p));e.appendChild(l)}return e}clickOutput(t,e){let n=t.tracker;if(!n)return;let i=n.spanAt(e);if(i>=0&&n.pendingAnchor===null){let r=n.spans[i];n.cycle(i),this.flushTrackerEvents(t),this.payload.protocol==="MQM"&&n.spans.includes(r),this.paintSpans(t);return}let o=n.click(e);this.flushTrackerEvents(t),o&&this.payload.protocol==="MQM"&&n.setCategory(n.spans.indexOf(o),E[0]),this.paintSpans(t)}flushTrackerEvents(t){let e=t.tracker;if(e)for(let n of e.events.splice(0))this.record(n.kind,t.segment,t.alias,n.payload)}paintSpans(t){let e=t.tracker;if(!e||!t.textEl||!t.spanListEl)return;t.textEl.querySelectorAll(".cp").forEach((i,o)=>{i.className="cp",delete i.dataset.severity;let r=e.spanAt(o);if(r>=0){let l=e.spans[r];i.classList.add("marked",`sev-${l.severity}`,k[l.origin]),i.dataset.severity=l.severity}e.pendingAnchor===o&&i.classList.add("anchor-pending")}),t.spanListEl.textContent="",e.spans.forEach((i,o)=>{let r=a("li",`span-item ${k[i.origin]}`);if(r.appendChild(a("span","span-desc",`[${i.start_i}-${i.end_i}] ${i.severity}`+(i.origin!=="human"?` (${i.origin})`:""))),this.payload.protocol==="MQM"){let c=a("select","category-picker");for(let u of E){let f=a("option",void 0,u);f.value=u,c.appendChild(f)}c.value=i.category??E[0],c.addEventListener("change",()=>e.setCategory(o,c.value)),r.appendChild(c)}let l=a("button","severity-button",i.severity);l.addEventListener("click",()=>{e.setSeverity(o,i.severity==="minor"?"major":"minor"),this.flushTrackerEvents(t),this.paintSpans(t)}),r.appendChild(l);let p=a("button","delete-span","remove");p.addEventListener("click",()=>{e.remove(o),this.flushTrackerEvents(t),this.paintSpans(t)}),r.appendChild(p),t.spanListEl.appendChild(r)})}showWarnings(t){this.warningsEl.textContent="",this.warningsEl.classList.remove("hidden");for(let e of t)this.warningsEl.appendChild(a("div","tutorial-warning",e));if(this.payload.flags.skip_allowed){let e=a("button","skip-tutorial","Skip tutorial");e.addEventListener("click",()=>{this.skipRequested=!0,this.record("tutorial_skip",null,null,{}),this.submit()}),this.warningsEl.appendChild(e)}this.record("tutorial_fail",null,null,{warnings:t})}collect(){let t={};for(let e of this.payload.aliases)t[e]={segments:[]};for(let e of this.outputs){let n=e.tracker?e.tracker.spans.map(i=>({...i})):[];if(this.payload.protocol!=="MQM")for(let i of n)delete i.category;t[e.alias].segments[e.segment]={score:e.score,spans:n,...e.postedit!==null?{postedit:e.postedit}:{},...e.missing?{missing:!0}:{}}}return{document_index:this.payload.document_index,outputs:t,...this.comment?{comment:this.comment}:{},...this.skipRequested?{skip_tutorial:!0}:{},events:[...this.events,{ts:this.now(),segment:null,model:null,kind:"submit",payload:{}}]}}async submit(){let t=await this.onSubmit(this.collect());if(t.status==="blocked"){this.showWarnings(t.warnings??[]);return}this.onAccepted()}};function H(s,t,e){s.textContent="";let n=a("div","completion-screen");n.appendChild(a("h2",void 0,"All done, thank you!")),n.appendChild(a("p",void 0,"Your completion code (paste it into the crowdsourcing form):")),n.appendChild(a("code",`verdict-${t}`,e)),s.appendChild(n)}async function x(s,t){let e=await t.nextItem();if(e.complete){H(s,e.verdict,e.token);return}new T(s,e,n=>t.submit(n),()=>{x(s,t)})}function d(s,t,e){let n=document.createElement(s);return t&&(n.className=t),e!==void 0&&(n.textContent=e),n}function R(s){return s===null?"n/a":`${s.toFixed(1)}s`}function $(s){return s===null?"n/a":`${Math.round(s*100)}%`}function O(s){let t=d("table","progress-table"),e=d("tr");for(let n of["Annotator","Progress","Time/item","Attention","Tutorial fails"])e.appendChild(d("th",void 0,n));t.appendChild(e);for(let[n,i]of Object.entries(s.users)){let o=d("tr");o.appendChild(d("td","user-id",n)),o.appendChild(d("td",void 0,`${i.done}/${i.total}`)),o.appendChild(d("td",void 0,R(i.mean_seconds_per_item))),o.appendChild(d("td",void 0,i.attention_seen?`${$(i.attention_pass_rate)} of ${i.attention_seen}`:"n/a")),o.appendChild(d("td",void 0,String(i.tutorial_attempts))),t.appendChild(o)}return t}function D(s){let t=d("div","record-browser");t.appendChild(d("h3",void 0,`Annotations (${s.records.length})`));for(let e of s.records){let n=d("details","record"),i=e.superseded_by!==null?" (superseded)":"";n.appendChild(d("summary",void 0,`${e.user} - document ${e.doc} - ${e.model}${i}`));let o=d("pre","record-json");o.textContent=JSON.stringify(e,null,2),n.appendChild(o),t.appendChild(n)}return t}function N(s){let t=d("div","ranking");s.bias_disclaimer&&s.bias_disclaimer_text&&t.appendChild(d("div","bias-disclaimer",s.bias_disclaimer_text));let e=new Set(s.separations),n=d("div","ranking-rows");return s.rows.forEach((i,o)=>{let r=d("div","ranking-row");if(r.appendChild(d("span","rank",`${o+1}.`)),r.appendChild(d("span","model",i.model)),r.appendChild(d("span","mean",i.mean.toFixed(1))),r.appendChild(d("span","count",`n=${i.n}`)),n.appendChild(r),e.has(o)){let l=d("hr","separation-line");l.title=`p < ${s.alpha}`,n.appendChild(l)}}),t.appendChild(n),t.appendChild(d("div","alpha-note",`Lines separate models with a paired two-sided p below ${s.alpha}.`)),t}var y=class{constructor(t,e){this.root=t;this.api=e;this.resultsContainer=d("div","results-container")}async load(){let t=await this.api.dashboard();this.root.textContent="";let e=d("div","dashboard-screen");e.appendChild(d("h2",void 0,`Campaign ${t.campaign_id}`)),e.appendChild(d("div","campaign-meta",`${t.protocol} protocol, ${t.assignment} assignment - ${t.items_done}/${t.items_total} items done`)),t.bias_disclaimer&&e.appendChild(d("div","bias-disclaimer",t.bias_disclaimer)),e.appendChild(O(t)),t.assignment==="task-based"&&e.appendChild(this.renderRedistributeForm(Object.keys(t.users)));let n=d("a","export-link","Download annotations (JSON)");n.href=this.api.exportUrl(),e.appendChild(n);let i=d("button","show-results","Show results");i.addEventListener("click",()=>void this.reveal()),e.appendChild(i),e.appendChild(this.resultsContainer),e.appendChild(D(t)),this.root.appendChild(e)}async reveal(){let t=await this.api.revealResults();this.resultsContainer.textContent="",this.resultsContainer.appendChild(N(t))}renderRedistributeForm(t){let e=d("div","redistribute-form");e.appendChild(d("h3",void 0,"Redistribute task documents"));let n=d("select","from-user"),i=d("select","to-user");for(let p of t)for(let c of[n,i]){let u=d("option",void 0,p);u.value=p,c.appendChild(u)}let o=d("input","doc-indices");o.placeholder="document indices, e.g. 3,4,5";let r=d("button","apply-redistribute","Move"),l=d("span","redistribute-status");r.addEventListener("click",()=>{let p=o.value.split(",").map(c=>Number.parseInt(c.trim(),10)).filter(c=>Number.isFinite(c));this.api.redistribute(n.value,i.value,p).then(()=>(l.textContent="moved",this.load())).catch(c=>{l.textContent=c.message})});for(let p of[n,i,o,r,l])e.appendChild(p);return e}};async function G(){let s=document.getElementById("app");if(!s)return;let t=L();if(!t){s.textContent="Missing token: open the magic link you were given.";return}let e=new v(t);try{(await e.session()).role==="manager"?await new y(s,e).load():await x(s,e)}catch(n){s.textContent=`Could not start session: ${n.message}`}}G();})();
